#include "stages.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include <openssl/crypto.h>

#include <Eigen/Core>
#include <boost/version.hpp>

#include "causwave/errors.hpp"
#include "causwave/field2d.hpp"
#include "causwave/io.hpp"
#include "causwave/oracle.hpp"

#ifndef CAUSWAVE_VERSION
#define CAUSWAVE_VERSION "0.0.0"
#endif

namespace causwave::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  if (!f) throw IoError("cannot read " + p.string());
  std::ostringstream s;
  s << f.rdbuf();
  return s.str();
}

json versions() {
  return {{"causwave", CAUSWAVE_VERSION},
          {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                        std::to_string(EIGEN_MINOR_VERSION)},
          {"boost", BOOST_LIB_VERSION},
          {"openssl", OpenSSL_version(OPENSSL_VERSION)},
          {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                                std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                                std::to_string(NLOHMANN_JSON_VERSION_PATCH)}};
}

// Everything a stage needs; paths are relative to the output directory.
struct Ctx {
  const PipelineConfig& cfg;
  Manifest& manifest;
  fs::path dir;
  std::vector<std::string> inputs, outputs;
  json results = json::object();
  bool converged = true;

  std::string path(const std::string& f) const { return (dir / f).string(); }
  std::string out(const std::string& f) {
    outputs.push_back(f);
    return path(f);
  }
  std::string in(const std::string& f) {
    if (!fs::exists(dir / f)) throw IoError(f + " not found in " + dir.string() + "; run the stage that writes it first");
    manifest.check_input(f);
    inputs.push_back(f);
    return path(f);
  }
  Caustic caustic() { return caustic_from_json(read_json(in("caustic.json"))); }
};

Raster rasterize(const Sampler& s, const Box& box, int n) {
  Raster r = Raster::make(box.x0, box.x1, box.y0, box.y1, n, n);
  r.fill(s);
  return r;
}

Box field_box(const PipelineConfig& cfg, const Caustic& c) { return outer_box(cfg.model, c, cfg.delta_factor); }

json arc_summary(const std::array<ArcWave, 4>& waves) {
  json a = json::array();
  for (const auto& w : waves)
    a.push_back({{"k", w.k},
                 {"nodes", w.nodes},
                 {"quantum_number", w.quantum_number},
                 {"regularity", w.regularity},
                 {"mismatch", w.mismatch},
                 {"length", w.length},
                 {"c", w.c}});
  return a;
}

std::array<ArcWave, 4> arcs_for(const PipelineConfig& cfg, const Caustic& c, ArcMethod method) {
  auto waves = solve_arcs(cfg.model, c, c.energy, method, cfg.n1, cfg.n2);
  if (method == ArcMethod::SE) match_arc_constants(waves);
  return waves;
}

// ----- stages -----

void stage_eigensearch(Ctx& x) {
  const auto& cfg = x.cfg;
  EigenSearchOptions o;
  o.method = cfg.method;
  o.n1 = cfg.n1;
  o.n2 = cfg.n2;
  o.e_lo = cfg.e_lo;
  o.e_hi = cfg.e_hi;
  o.tol = cfg.tol;
  o.max_iter = cfg.max_iter;
  o.trace = cfg.trace;
  o.accept_unconverged = true;
  const EigenState st = search_eigenstate(cfg.model, o);

  json hist = json::array();
  for (const auto& p : st.history) hist.push_back({p.energy, p.theta, p.f_h, p.f_v});
  json state = {{"energy", st.energy},
                {"theta", st.theta},
                {"vertex", {st.vertex.x, st.vertex.y}},
                {"converged", st.converged},
                {"max_regularity", st.max_regularity},
                {"method", to_string(cfg.method)},
                {"state", {cfg.n1, cfg.n2}},
                {"arcs", arc_summary(st.waves)},
                {"history_columns", {"energy", "theta", "f_h", "f_v"}},
                {"history", hist}};
  write_json(x.out("eigenstate.json"), state);
  write_json(x.out("caustic.json"), to_json(st.caustic));

  std::vector<std::vector<double>> rows;
  for (const auto& a : st.caustic.arcs)
    for (int i = 0; i <= 200; ++i) {
      const double u = a.u_lo + (a.u_hi - a.u_lo) * i / 200.0;
      const Point2 q = a.point(u);
      rows.push_back({static_cast<double>(a.k), u, q.x, q.y});
    }
  write_csv(x.out("fig1_caustic.csv"), {"arc", "u", "x", "y"}, rows);

  x.converged = st.converged;
  x.results = {{"energy", st.energy},
               {"vertex", {st.vertex.x, st.vertex.y}},
               {"max_regularity", st.max_regularity},
               {"iterations", st.history.size()},
               {"closure_gap", st.caustic.closure_gap}};
}

void stage_trace(Ctx& x) {
  const auto& cfg = x.cfg;
  double energy = 0.0, theta = 0.0;
  if (fs::exists(x.dir / "eigenstate.json")) {
    const json st = read_json(x.in("eigenstate.json"));
    energy = st.at("energy").get<double>();
    theta = st.at("theta").get<double>();
  } else {
    const auto g = harmonic_guess(cfg.model, cfg.n1, cfg.n2);
    energy = g[0];
    theta = g[1];
  }
  const Point2 q0 = equipotential_point_at_angle(cfg.model, energy, theta);
  const double dt = cfg.trace.dt > 0 ? cfg.trace.dt : default_time_step(cfg.model);

  // a short stretch with the Jacobi determinant for plotting
  const Trajectory traj =
      integrate_trajectory(cfg.model, q0, {0.0, 0.0}, 20.0 * min_period(cfg.model), dt, 1, cfg.trace.energy_tol);
  const JacobiPair jac = integrate_jacobi(traj);
  std::vector<std::vector<double>> rows;
  for (size_t i = 0; i < traj.samples.size(); i += 10) {
    const auto& s = traj.samples[i];
    rows.push_back({s.t, s.state.q.x, s.state.q.y, s.state.p.x, s.state.p.y, jac.samples[i].det});
  }
  write_csv(x.out("fig1_trajectories.csv"), {"t", "x", "y", "px", "py", "det"}, rows);

  const CausticTrace tr = trace_caustic(cfg.model, q0, {0.0, 0.0}, cfg.trace);
  rows.clear();
  for (const auto& p : tr.points)
    rows.push_back({p.t, p.position.x, p.position.y, p.momentum.x, p.momentum.y});
  write_csv(x.out("touch_points.csv"), {"t", "x", "y", "px", "py"}, rows);
  write_json(x.out("trace.json"), {{"energy", eval_potential(cfg.model, q0)},
                                   {"theta", theta},
                                   {"start", {q0.x, q0.y}},
                                   {"max_energy_error", tr.max_energy_error},
                                   {"t_end", tr.t_end},
                                   {"touch_points", tr.points.size()}});
  x.results = {{"touch_points", tr.points.size()}, {"max_energy_error", tr.max_energy_error}};
}

void stage_caustic(Ctx& x) {
  const json tr = read_json(x.in("trace.json"));
  const double energy = tr.at("energy").get<double>();
  const Point2 start{tr.at("start")[0].get<double>(), tr.at("start")[1].get<double>()};
  std::ifstream f(x.in("touch_points.csv"));
  std::string line;
  std::getline(f, line);
  std::vector<CausticPoint> pts;
  while (std::getline(f, line)) {
    std::array<double, 5> v{};
    std::istringstream s(line);
    std::string cell;
    for (auto& d : v) {
      if (!std::getline(s, cell, ',')) throw IoError("touch_points.csv: short row");
      d = std::strtod(cell.c_str(), nullptr);
    }
    CausticPoint p;
    p.t = v[0];
    p.position = {v[1], v[2]};
    p.momentum = {v[3], v[4]};
    pts.push_back(p);
  }
  Caustic c = build_caustic(pts, x.cfg.model, energy, 0);
  const int v = nearest_vertex(c, start);
  if (v != 0) c = orient_caustic(std::move(c), v);
  write_json(x.out("caustic.json"), to_json(c));
  x.results = {{"closure_gap", c.closure_gap}, {"start_vertex", c.start_vertex}};
}

void stage_arcs(Ctx& x) {
  const Caustic c = x.caustic();
  auto waves = solve_arcs(x.cfg.model, c, c.energy, x.cfg.method, x.cfg.n1, x.cfg.n2);
  json arcs = arc_summary(waves);
  if (x.cfg.method == ArcMethod::SE) x.results["closure"] = match_arc_constants(waves);
  if (x.cfg.method == ArcMethod::QHJE) {
    double worst = 0.0;
    for (size_t k = 0; k < 4; ++k) {
      const ArcResiduals r = qhje_residuals(waves[k], x.cfg.model);
      arcs[k]["residual_real"] = r.real_part;
      arcs[k]["residual_imag"] = r.imag_part;
      arcs[k]["residual_action"] = r.action;
      worst = std::max({worst, r.real_part, r.imag_part});
    }
    x.results["max_arc_residual"] = worst;
  }
  double reg = 0.0;
  for (const auto& w : waves) reg = std::max(reg, w.regularity);
  x.results["max_regularity"] = reg;
  x.results["arcs"] = arcs;
  x.converged = reg <= x.cfg.tol;
  write_arc_waves_csv(x.out("fig2_arc_waves.csv"), waves);
}

void field_se(Ctx& x, const Caustic& c, std::shared_ptr<const Mesh> in, const Box& box) {
  const auto& cfg = x.cfg;
  const auto waves = arcs_for(cfg, c, ArcMethod::SE);
  double r_in = 0.0, r_out = 0.0;
  const FieldSolution fi = solve_dirichlet_se(in, cfg.model, c.energy, waves, &r_in);
  auto ex = std::make_shared<Mesh>(mesh_exterior(cfg.model, c, cfg.h, box));
  write_mesh(*ex, x.out("exterior_mesh.txt"));
  const FieldSolution fe = solve_dirichlet_se(ex, cfg.model, c.energy, waves, &r_out);
  const WeldResult w = weld(fi, fe);
  const Sampler s = w.field.sampler();
  write_raster_csv(x.out("fig3_interior_grid.csv"), rasterize(fi.sampler(), box, cfg.raster_n));
  write_raster_csv(x.out("fig4_exterior_grid.csv"), rasterize(fe.sampler(), box, cfg.raster_n));
  write_raster_csv(x.out("fig5_welded_grid.csv"), rasterize(s, box, cfg.raster_n));
  const Region full{box.x0, box.x1, box.y0, box.y1, cfg.raster_n, cfg.raster_n, {}};
  const TurningSurface ts = turning_surface(s, c, cfg.h);
  x.results = {{"residual_interior", r_in},     {"residual_exterior", r_out},
               {"c1_jump", w.c1_jump},           {"parity_defect", parity_defect(s, full, cfg.parity)},
               {"turning_fraction", ts.fraction}};
}

void field_wkb(Ctx& x, const Caustic& c, std::shared_ptr<const Mesh> in, const Box& box) {
  const auto& cfg = x.cfg;
  std::array<ClassicalAction, 2> ca;
  const std::array<int, 2> starts{0, 3};
  const char* names[2][2] = {{"fig6_classical_action_v1.csv", "fig7_wkb_partial_v1.csv"},
                             {"fig8_classical_action_v2.csv", "fig9_wkb_partial_v2.csv"}};
  json per = json::array();
  for (size_t j = 0; j < 2; ++j) {
    const Caustic cv = orient_caustic(c, starts[j]);
    ca[j] = solve_classical_action(cfg.model, c.energy, cv, in, arcs_for(cfg, cv, ArcMethod::WKB));
    write_raster_csv(x.out(names[j][0]), rasterize(ca[j].X.sampler(), box, cfg.raster_n));
    write_raster_csv(x.out(names[j][1]),
                     rasterize(wkb_partial(ca[j], cfg.amplitude, cfg.model.hbar).sampler(), box, cfg.raster_n));
    per.push_back({{"start_vertex", starts[j]},
                   {"boundary_mismatch", ca[j].boundary_mismatch},
                   {"eikonal_pass_fraction", ca[j].eikonal_pass_fraction},
                   {"characteristics", ca[j].segments},
                   {"open_rays", ca[j].open_rays}});
  }
  const FieldSolution full = wkb_field(ca[0], ca[1], cfg.amplitude, cfg.parity, cfg.model.hbar);
  const Sampler s = full.sampler();
  write_raster_csv(x.out("fig10_wkb_full.csv"), rasterize(s, box, cfg.raster_n));
  const Region reg{box.x0, box.x1, box.y0, box.y1, cfg.raster_n, cfg.raster_n, c.polygon(200)};
  x.results = {{"orientations", per}, {"parity_defect", parity_defect(s, reg, cfg.parity)}};
}

void field_qhje(Ctx& x, const Caustic& c, std::shared_ptr<const Mesh> in, const Box& box) {
  const auto& cfg = x.cfg;
  std::array<QhjeField, 2> qf;
  const std::array<int, 2> starts{0, 3};
  json per = json::array();
  for (size_t j = 0; j < 2; ++j) {
    const Caustic cv = orient_caustic(c, starts[j]);
    // the classical action only seeds the Newton iteration
    ClassicalActionOptions co;
    co.max_boundary_mismatch = std::numeric_limits<double>::infinity();
    const ClassicalAction ca =
        solve_classical_action(cfg.model, c.energy, cv, in, arcs_for(cfg, cv, ArcMethod::WKB), co);
    qf[j] = solve_qhje_field(in, cfg.model, c.energy, arcs_for(cfg, cv, ArcMethod::QHJE), &ca.X.values,
                             {cfg.qhje_max_iter, cfg.qhje_tol});
    per.push_back({{"start_vertex", starts[j]},
                   {"residual_real", qf[j].residual_real},
                   {"residual_imag", qf[j].residual_imag},
                   {"iterations", qf[j].iterations},
                   {"vortices", qf[j].vortices}});
  }
  const double hbar = cfg.model.hbar;
  write_raster_csv(x.out("fig11_qhje_X_v1.csv"), rasterize(qf[0].X.sampler(), box, cfg.raster_n));
  write_raster_csv(x.out("fig12_qhje_A.csv"), rasterize(qf[0].A.sampler(), box, cfg.raster_n));
  write_raster_csv(x.out("fig13_qhje_partial_v1.csv"), rasterize(qhje_partial(qf[0], hbar).sampler(), box, cfg.raster_n));
  write_raster_csv(x.out("fig14_qhje_X_v2.csv"), rasterize(qf[1].X.sampler(), box, cfg.raster_n));
  write_raster_csv(x.out("fig15_qhje_partial_v2.csv"), rasterize(qhje_partial(qf[1], hbar).sampler(), box, cfg.raster_n));
  const FieldSolution full = qhje_wavefunction(qf[0], qf[1], cfg.parity, hbar);
  const Sampler s = full.sampler();
  write_raster_csv(x.out("fig16_qhje_full.csv"), rasterize(s, box, cfg.raster_n));

  double m0 = 0.0, m1 = 0.0, diff = 0.0;
  for (size_t i = 0; i < in->size(); ++i) {
    m0 = std::max(m0, qf[0].A.values[i]);
    m1 = std::max(m1, qf[1].A.values[i]);
  }
  for (size_t i = 0; i < in->size(); ++i)
    diff = std::max(diff, std::abs(qf[0].A.values[i] / m0 - qf[1].A.values[i] / m1));
  const Region reg{box.x0, box.x1, box.y0, box.y1, cfg.raster_n, cfg.raster_n, c.polygon(200)};
  x.results = {{"orientations", per},
               {"amplitude_vertex_difference", diff},
               {"parity_defect", parity_defect(s, reg, cfg.parity)}};
}

void stage_field(Ctx& x) {
  const Caustic c = x.caustic();
  auto in = std::make_shared<Mesh>(mesh_interior(x.cfg.model, c, x.cfg.h));
  write_mesh(*in, x.out("interior_mesh.txt"));
  const Box box = field_box(x.cfg, c);
  switch (x.cfg.method) {
    case ArcMethod::SE: field_se(x, c, in, box); break;
    case ArcMethod::WKB: field_wkb(x, c, in, box); break;
    case ArcMethod::QHJE: field_qhje(x, c, in, box); break;
  }
  x.results["energy"] = c.energy;
  write_json(x.out("field.json"), {{"method", to_string(x.cfg.method)},
                                   {"parity", x.cfg.parity > 0 ? "even" : "odd"},
                                   {"results", x.results}});
}

void stage_oracle(Ctx& x) {
  const auto& cfg = x.cfg;
  const Spectrum sp = diagonalize(cfg.model, cfg.oracle_nx, cfg.oracle_ny);
  const int k = sp.find_state(cfg.n1, cfg.n2);
  if (k < 0) throw NotConverged("no oracle level is dominated by the target basis state", 1.0);
  json levels = json::array();
  for (int i = 0; i < sp.energies.size() && i < 40; ++i) {
    const auto d = sp.dominant(i);
    levels.push_back({{"energy", sp.energies[i]}, {"dominant", {d[0], d[1]}}, {"weight", sp.dominant_weight(i)}});
  }
  write_json(x.out("spectrum.json"), {{"basis", {cfg.oracle_nx, cfg.oracle_ny}},
                                      {"target", {cfg.n1, cfg.n2}},
                                      {"target_index", k},
                                      {"target_energy", sp.energies[k]},
                                      {"levels", levels}});
  Box box;
  if (fs::exists(x.dir / "caustic.json")) {
    box = field_box(cfg, x.caustic());
  } else {
    const double e = sp.energies[k];
    const double ax = 2.0 * std::sqrt(2.0 * e / cfg.model.mass) / cfg.model.omega_x;
    const double ay = 2.0 * std::sqrt(2.0 * e / cfg.model.mass) / cfg.model.omega_y;
    box = {-ax, ax, -ay, ay};
  }
  const Raster r = oracle_wavefunction(sp, k, box.x0, box.x1, box.y0, box.y1, cfg.raster_n, cfg.raster_n);
  write_raster_csv(x.out("oracle_grid.csv"), r);
  x.results = {{"target_energy", sp.energies[k]}, {"target_index", k}, {"dominant_weight", sp.dominant_weight(k)}};
}

void stage_compare(Ctx& x) {
  const auto& cfg = x.cfg;
  const Caustic c = x.caustic();
  const Raster oracle = read_raster_csv(x.in("oracle_grid.csv"));
  const Sampler so = [&](const Point2& q) { return oracle.sample(q); };
  const std::string interior = cfg.method == ArcMethod::SE    ? "fig3_interior_grid.csv"
                               : cfg.method == ArcMethod::WKB ? "fig10_wkb_full.csv"
                                                              : "fig16_qhje_full.csv";
  const Raster fi = read_raster_csv(x.in(interior));
  const Region reg{fi.x0, fi.x1, fi.y0, fi.y1, fi.nx, fi.ny, c.polygon(200)};
  const Comparison ci = compare_fields([&](const Point2& q) { return fi.sample(q); }, so, reg);
  x.results = {{"field", interior}, {"rel_l2_interior", ci.rel_l2}, {"sign", ci.sign}, {"samples", ci.samples}};
  if (cfg.method == ArcMethod::SE) {
    const Raster fw = read_raster_csv(x.in("fig5_welded_grid.csv"));
    const Region full{fw.x0, fw.x1, fw.y0, fw.y1, fw.nx, fw.ny, {}};
    x.results["rel_l2_full"] = compare_fields([&](const Point2& q) { return fw.sample(q); }, so, full).rel_l2;
  }
  write_json(x.out("compare.json"), x.results);
}

using StageFn = void (*)(Ctx&);

StageFn stage_fn(const std::string& name) {
  if (name == "eigensearch") return stage_eigensearch;
  if (name == "trace") return stage_trace;
  if (name == "caustic") return stage_caustic;
  if (name == "arcs") return stage_arcs;
  if (name == "field") return stage_field;
  if (name == "oracle") return stage_oracle;
  if (name == "compare") return stage_compare;
  throw InvalidArgument("unknown stage " + name);
}

}  // namespace

Manifest::Manifest(fs::path dir, const PipelineConfig& cfg) : dir_(std::move(dir)) {
  const std::string hash = config_hash(cfg);
  const fs::path p = dir_ / "manifest.json";
  if (fs::exists(p)) {
    try {
      j_ = nlohmann::json::parse(slurp(p));
    } catch (const nlohmann::json::exception&) {
      j_ = nlohmann::json();
    }
    if (!j_.is_object() || j_.value("config_hash", "") != hash) j_ = nlohmann::json();
  }
  if (j_.is_null()) j_ = {{"config_hash", hash}, {"stages", nlohmann::json::object()}};
  j_["version"] = CAUSWAVE_VERSION;
  j_["versions"] = versions();
  j_["config"] = cfg.canonical();
  j_["method"] = to_string(cfg.method);
  j_["state"] = {cfg.n1, cfg.n2};
  j_["parity"] = cfg.parity > 0 ? "even" : "odd";
}

std::string Manifest::file_hash(const std::string& file) const { return sha256_hex(slurp(dir_ / file)); }

bool Manifest::fresh(const std::string& stage) const {
  const auto& st = j_["stages"];
  if (!st.contains(stage)) return false;
  for (const auto* group : {"inputs", "outputs"})
    for (const auto& [file, hash] : st[stage][group].items())
      if (!fs::exists(dir_ / file) || file_hash(file) != hash.get<std::string>()) return false;
  return true;
}

void Manifest::check_input(const std::string& file) const {
  for (const auto& [stage, rec] : j_["stages"].items())
    if (rec["outputs"].contains(file) && rec["outputs"][file].get<std::string>() != file_hash(file))
      throw IoError(file + " changed after stage " + stage + " wrote it; rerun " + stage);
}

void Manifest::record(const std::string& stage, bool converged, nlohmann::json results, const std::vector<std::string>& inputs,
                      const std::vector<std::string>& outputs) {
  nlohmann::json rec = {{"converged", converged}, {"results", std::move(results)}, {"inputs", nlohmann::json::object()},
              {"outputs", nlohmann::json::object()}};
  for (const auto& f : inputs) rec["inputs"][f] = file_hash(f);
  for (const auto& f : outputs) rec["outputs"][f] = file_hash(f);
  // the latest writer owns a file; consumers of the old bytes go stale via fresh()
  for (auto& [name, other] : j_["stages"].items())
    for (const auto& f : outputs)
      if (name != stage) other["outputs"].erase(f);
  j_["stages"][stage] = std::move(rec);
  if (stage == "eigensearch") {
    j_["energy"] = j_["stages"][stage]["results"]["energy"];
    j_["converged"] = converged;
  }
}

void Manifest::save() const { write_json((dir_ / "manifest.json").string(), j_); }

const std::vector<std::string>& stage_names() {
  static const std::vector<std::string> n = {"trace", "caustic", "arcs", "eigensearch", "field", "oracle", "compare"};
  return n;
}

const std::vector<std::string>& pipeline_stages() {
  static const std::vector<std::string> n = {"eigensearch", "trace", "arcs", "field", "oracle", "compare"};
  return n;
}

StageStatus run_stage(const std::string& name, const PipelineConfig& cfg, Manifest& manifest, bool resume) {
  const StageFn fn = stage_fn(name);
  if (resume && manifest.fresh(name)) {
    const bool ok = manifest.data()["stages"][name].value("converged", true);
    std::printf("%-12s cached\n", name.c_str());
    return ok ? StageStatus::Cached : StageStatus::NotConverged;
  }
  const auto t0 = std::chrono::steady_clock::now();
  Ctx x{cfg, manifest, fs::path(cfg.out_dir), {}, {}, json::object(), true};
  try {
    fs::create_directories(x.dir);
    fn(x);
  } catch (const Error& e) {
    throw StageError(name, e.kind(), e.what());
  } catch (const fs::filesystem_error& e) {
    throw StageError(name, "IoError", e.what());
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  x.results["seconds"] = secs;
  manifest.record(name, x.converged, x.results, x.inputs, x.outputs);
  manifest.save();
  std::printf("%-12s %s (%.1f s)\n", name.c_str(), x.converged ? "ok" : "not converged", secs);
  return x.converged ? StageStatus::Ok : StageStatus::NotConverged;
}

int run_pipeline(const PipelineConfig& cfg, bool resume) {
  fs::create_directories(cfg.out_dir);
  Manifest m(cfg.out_dir, cfg);
  bool converged = true;
  for (const auto& s : pipeline_stages())
    if (run_stage(s, cfg, m, resume) == StageStatus::NotConverged) converged = false;
  return converged ? 0 : 2;
}

}  // namespace causwave::cli
