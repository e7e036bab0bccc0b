#include "config.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <openssl/evp.h>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "causwave/errors.hpp"
#include "causwave/io.hpp"

namespace causwave::cli {

namespace pt = boost::property_tree;

namespace {

const std::map<std::string, std::set<std::string>> kKeys = {
    {"model", {"omega_x", "omega_y", "lambda", "mass", "hbar"}},
    {"search", {"method", "n1", "n2", "parity", "e_lo", "e_hi", "tol", "max_iter"}},
    {"trace", {"dt", "t_max", "energy_tol"}},
    {"field", {"h", "delta_factor", "amplitude", "qhje_tol", "qhje_max_iter"}},
    {"oracle", {"nx", "ny"}},
    {"output", {"dir", "raster_n"}},
};

template <class T>
void read(const pt::ptree& tree, const std::string& key, T& out) {
  if (auto v = tree.get_optional<std::string>(key)) {
    try {
      out = tree.get<T>(key);
    } catch (const pt::ptree_error&) {
      throw InvalidArgument("config key " + key + ": cannot parse '" + *v + "'");
    }
  }
}

void positive(double v, const char* key) {
  if (!(v > 0.0) || !std::isfinite(v)) throw InvalidArgument(std::string("config key ") + key + " must be > 0");
}

}  // namespace

ArcMethod parse_method(const std::string& s) {
  if (s == "se") return ArcMethod::SE;
  if (s == "wkb") return ArcMethod::WKB;
  if (s == "qhje") return ArcMethod::QHJE;
  throw InvalidArgument("method must be se, wkb or qhje, got '" + s + "'");
}

PipelineConfig parse_config(const std::string& text) {
  pt::ptree tree;
  std::istringstream in(text);
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw InvalidArgument(std::string("config: ") + e.what());
  }
  for (const auto& [section, body] : tree) {
    const auto it = kKeys.find(section);
    if (it == kKeys.end()) throw InvalidArgument("config: unknown section [" + section + "]");
    for (const auto& [key, v] : body)
      if (!it->second.count(key)) throw InvalidArgument("config: unknown key " + section + "." + key);
  }

  PipelineConfig c;
  read(tree, "model.omega_x", c.model.omega_x);
  read(tree, "model.omega_y", c.model.omega_y);
  read(tree, "model.lambda", c.model.lambda);
  read(tree, "model.mass", c.model.mass);
  read(tree, "model.hbar", c.model.hbar);
  std::string method = "se", parity = "even", amplitude = "constant";
  read(tree, "search.method", method);
  c.method = parse_method(method);
  read(tree, "search.n1", c.n1);
  read(tree, "search.n2", c.n2);
  read(tree, "search.parity", parity);
  if (parity != "even" && parity != "odd") throw InvalidArgument("config key search.parity must be even or odd");
  c.parity = parity == "even" ? +1 : -1;
  read(tree, "search.e_lo", c.e_lo);
  read(tree, "search.e_hi", c.e_hi);
  read(tree, "search.tol", c.tol);
  read(tree, "search.max_iter", c.max_iter);
  read(tree, "trace.dt", c.trace.dt);
  read(tree, "trace.t_max", c.trace.t_max);
  read(tree, "trace.energy_tol", c.trace.energy_tol);
  read(tree, "field.h", c.h);
  read(tree, "field.delta_factor", c.delta_factor);
  read(tree, "field.amplitude", amplitude);
  if (amplitude != "constant" && amplitude != "transported")
    throw InvalidArgument("config key field.amplitude must be constant or transported");
  c.amplitude = amplitude == "constant" ? AmplitudeMode::Constant : AmplitudeMode::Transported;
  read(tree, "field.qhje_tol", c.qhje_tol);
  read(tree, "field.qhje_max_iter", c.qhje_max_iter);
  read(tree, "oracle.nx", c.oracle_nx);
  read(tree, "oracle.ny", c.oracle_ny);
  read(tree, "output.dir", c.out_dir);
  read(tree, "output.raster_n", c.raster_n);
  c.validate();
  return c;
}

PipelineConfig load_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw IoError("cannot read config " + path);
  std::ostringstream s;
  s << f.rdbuf();
  return parse_config(s.str());
}

void PipelineConfig::validate() const {
  model.validate();
  if (n1 < 0 || n2 < 0) throw InvalidArgument("quantum numbers must be >= 0");
  if (e_lo < 0.0 || e_hi < 0.0 || (e_hi > 0.0 && !(e_hi > e_lo)))
    throw InvalidArgument("config keys search.e_lo/e_hi must be 0 or an increasing bracket");
  positive(tol, "search.tol");
  if (max_iter < 1) throw InvalidArgument("config key search.max_iter must be >= 1");
  if (trace.dt < 0.0 || trace.t_max < 0.0) throw InvalidArgument("config keys trace.dt/t_max must be >= 0");
  positive(trace.energy_tol, "trace.energy_tol");
  positive(h, "field.h");
  if (!(delta_factor > 1.0)) throw InvalidArgument("config key field.delta_factor must be > 1");
  if (method == ArcMethod::QHJE) {
    positive(qhje_tol, "field.qhje_tol");
    if (qhje_max_iter < 1) throw InvalidArgument("config key field.qhje_max_iter must be >= 1");
  }
  if (oracle_nx <= n1 || oracle_ny <= n2) throw InvalidArgument("oracle basis too small for the target state");
  if (raster_n < 2) throw InvalidArgument("config key output.raster_n must be >= 2");
  if (out_dir.empty()) throw InvalidArgument("config key output.dir is empty");
}

std::string PipelineConfig::canonical() const {
  std::map<std::string, std::string> kv;
  kv["model.omega_x"] = fmt9(model.omega_x);
  kv["model.omega_y"] = fmt9(model.omega_y);
  kv["model.lambda"] = fmt9(model.lambda);
  kv["model.mass"] = fmt9(model.mass);
  kv["model.hbar"] = fmt9(model.hbar);
  kv["search.method"] = to_string(method);
  kv["search.n1"] = std::to_string(n1);
  kv["search.n2"] = std::to_string(n2);
  kv["search.parity"] = parity > 0 ? "even" : "odd";
  kv["search.e_lo"] = fmt9(e_lo);
  kv["search.e_hi"] = fmt9(e_hi);
  kv["search.tol"] = fmt9(tol);
  kv["search.max_iter"] = std::to_string(max_iter);
  kv["trace.dt"] = fmt9(trace.dt);
  kv["trace.t_max"] = fmt9(trace.t_max);
  kv["trace.energy_tol"] = fmt9(trace.energy_tol);
  kv["field.h"] = fmt9(h);
  kv["field.delta_factor"] = fmt9(delta_factor);
  kv["field.amplitude"] = amplitude == AmplitudeMode::Constant ? "constant" : "transported";
  kv["field.qhje_tol"] = fmt9(qhje_tol);
  kv["field.qhje_max_iter"] = std::to_string(qhje_max_iter);
  kv["oracle.nx"] = std::to_string(oracle_nx);
  kv["oracle.ny"] = std::to_string(oracle_ny);
  kv["output.raster_n"] = std::to_string(raster_n);
  std::string out;
  for (const auto& [k, v] : kv) out += k + " = " + v + "\n";
  return out;
}

std::string sha256_hex(const std::string& bytes) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1)
    throw IoError("SHA-256 failed");
  static const char* hex = "0123456789abcdef";
  std::string s;
  for (unsigned int i = 0; i < len; ++i) {
    s += hex[md[i] >> 4];
    s += hex[md[i] & 15];
  }
  return s;
}

std::string config_hash(const PipelineConfig& cfg) { return sha256_hex(cfg.canonical()); }

}  // namespace causwave::cli
