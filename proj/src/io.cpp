#include "causwave/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

#include "causwave/errors.hpp"

namespace causwave {

namespace {

std::ofstream open_out(const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot write " + path);
  return f;
}

double at_or_nan(const std::vector<double>& v, size_t i) {
  return i < v.size() ? v[i] : std::numeric_limits<double>::quiet_NaN();
}

}  // namespace

std::string fmt9(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

double round9(double v) {
  if (!std::isfinite(v)) return v;
  return std::strtod(fmt9(v).c_str(), nullptr);
}

nlohmann::json rounded(const nlohmann::json& j) {
  if (j.is_number_float()) {
    const double v = j.get<double>();
    return std::isfinite(v) ? nlohmann::json(round9(v)) : nlohmann::json(nullptr);
  }
  if (j.is_array() || j.is_object()) {
    nlohmann::json out = j;
    for (auto it = out.begin(); it != out.end(); ++it) *it = rounded(*it);
    return out;
  }
  return j;
}

void write_json(const std::string& path, const nlohmann::json& j) {
  auto f = open_out(path);
  f << rounded(j).dump(2) << '\n';
  if (!f) throw IoError("failed writing " + path);
}

nlohmann::json read_json(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw IoError("cannot read " + path);
  try {
    return nlohmann::json::parse(f);
  } catch (const nlohmann::json::exception& e) {
    throw IoError(path + ": " + e.what());
  }
}

void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows) {
  auto f = open_out(path);
  for (size_t i = 0; i < header.size(); ++i) f << (i ? "," : "") << header[i];
  f << '\n';
  for (const auto& r : rows) {
    for (size_t i = 0; i < r.size(); ++i) f << (i ? "," : "") << fmt9(r[i]);
    f << '\n';
  }
  if (!f) throw IoError("failed writing " + path);
}

void write_raster_csv(const std::string& path, const Raster& r) {
  std::vector<std::vector<double>> rows;
  rows.reserve(r.values.size());
  for (int j = 0; j < r.ny; ++j)
    for (int i = 0; i < r.nx; ++i) rows.push_back({r.x(i), r.y(j), r.at(i, j)});
  write_csv(path, {"x", "y", "value"}, rows);
}

Raster read_raster_csv(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw IoError("cannot read " + path);
  std::string line;
  std::getline(f, line);
  std::map<double, int> xs, ys;
  std::vector<std::array<double, 3>> pts;
  while (std::getline(f, line)) {
    if (line.empty()) continue;
    std::array<double, 3> p{};
    std::istringstream s(line);
    std::string cell;
    for (auto& v : p) {
      if (!std::getline(s, cell, ',')) throw IoError(path + ": short row");
      v = std::strtod(cell.c_str(), nullptr);
    }
    xs[p[0]] = 0;
    ys[p[1]] = 0;
    pts.push_back(p);
  }
  if (xs.size() < 2 || ys.size() < 2 || pts.size() != xs.size() * ys.size())
    throw IoError(path + ": not a regular raster");
  int k = 0;
  for (auto& [x, i] : xs) i = k++;
  k = 0;
  for (auto& [y, i] : ys) i = k++;
  Raster r = Raster::make(xs.begin()->first, xs.rbegin()->first, ys.begin()->first, ys.rbegin()->first,
                          static_cast<int>(xs.size()), static_cast<int>(ys.size()));
  for (const auto& p : pts) r.at(xs[p[0]], ys[p[1]]) = p[2];
  return r;
}

nlohmann::json to_json(const Caustic& c) {
  nlohmann::json j;
  j["energy"] = c.energy;
  j["start_vertex"] = c.start_vertex;
  j["closure_gap"] = c.closure_gap;
  for (const auto& v : c.vertices) j["vertices"].push_back({v.x, v.y});
  for (const auto& a : c.arcs) {
    j["arcs"].push_back({{"k", a.k},
                         {"axis", a.axis == ArcAxis::X ? "x" : "y"},
                         {"lo", a.f.lo()},
                         {"hi", a.f.hi()},
                         {"coeffs", a.f.coeffs()},
                         {"u_lo", a.u_lo},
                         {"u_hi", a.u_hi},
                         {"vertex", a.vertex},
                         {"orientation", a.orientation},
                         {"fit_rms", a.fit_rms}});
  }
  for (const auto& t : c.traversal)
    j["traversal"].push_back(
        {{"arc", t.arc}, {"from", t.from_vertex}, {"to", t.to_vertex}, {"predecessor", t.predecessor}});
  return j;
}

Caustic caustic_from_json(const nlohmann::json& j) {
  try {
    Caustic c;
    c.energy = j.at("energy").get<double>();
    c.start_vertex = j.at("start_vertex").get<int>();
    c.closure_gap = j.at("closure_gap").get<double>();
    if (j.at("vertices").size() != 4 || j.at("arcs").size() != 4 || j.at("traversal").size() != 4)
      throw IoError("caustic needs four arcs, vertices and traversal steps");
    for (size_t v = 0; v < 4; ++v) c.vertices[v] = {j["vertices"][v][0].get<double>(), j["vertices"][v][1].get<double>()};
    for (size_t k = 0; k < 4; ++k) {
      const auto& a = j["arcs"][k];
      CausticArc& arc = c.arcs[k];
      arc.k = a.at("k").get<int>();
      arc.axis = a.at("axis").get<std::string>() == "x" ? ArcAxis::X : ArcAxis::Y;
      arc.f = ChebSeries(a.at("lo").get<double>(), a.at("hi").get<double>(), a.at("coeffs").get<std::vector<double>>());
      arc.u_lo = a.at("u_lo").get<double>();
      arc.u_hi = a.at("u_hi").get<double>();
      arc.vertex = a.at("vertex").get<std::array<int, 2>>();
      arc.orientation = a.at("orientation").get<int>();
      arc.fit_rms = a.at("fit_rms").get<double>();
      const auto& t = j["traversal"][k];
      c.traversal[k] = {t.at("arc").get<int>(), t.at("from").get<int>(), t.at("to").get<int>(),
                        t.at("predecessor").get<int>()};
    }
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("malformed caustic: ") + e.what());
  }
}

void write_arc_waves_csv(const std::string& path, const std::array<ArcWave, 4>& waves) {
  std::vector<std::vector<double>> rows;
  for (const auto& w : waves)
    for (size_t i = 0; i < w.u.size(); ++i)
      rows.push_back({static_cast<double>(w.k), w.u[i], w.x[i], w.y[i], at_or_nan(w.psi, i), at_or_nan(w.X, i),
                      at_or_nan(w.Y, i), at_or_nan(w.A, i), at_or_nan(w.p_cl, i), at_or_nan(w.X_cl, i)});
  write_csv(path, {"k", "u", "x", "y", "psi", "X", "Y", "A", "p_cl", "X_cl"}, rows);
}

}  // namespace causwave
