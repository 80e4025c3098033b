#include "rte/harness.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "rte/dense.hpp"
#include "rte/errors.hpp"
#include "rte/fft_solver.hpp"
#include "rte/png_writer.hpp"
#include "rte/rsf.hpp"
#include "rte/sources.hpp"

namespace rte {

namespace {

double now_seconds() {
  return std::chrono::duration<double>(
             std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

double parse_double(const std::string& key, const std::string& value) {
  try {
    size_t used = 0;
    const double v = std::stod(value, &used);
    if (used != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw InputError("bad numeric value for " + key + ": '" + value + "'");
  }
}

int parse_int(const std::string& key, const std::string& value) {
  try {
    size_t used = 0;
    const int v = std::stoi(value, &used);
    if (used != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw InputError("bad integer value for " + key + ": '" + value + "'");
  }
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "1" || value == "true" || value == "yes") return true;
  if (value == "0" || value == "false" || value == "no") return false;
  throw InputError("bad boolean value for " + key + ": '" + value + "'");
}

std::string eps_tag(double eps) {
  std::ostringstream os;
  os << std::scientific << std::setprecision(0) << eps;
  return os.str();
}

std::string join_modes(const std::vector<int>& modes) {
  std::ostringstream os;
  for (size_t i = 0; i < modes.size(); ++i) {
    if (i) os << '|';
    os << modes[i];
  }
  return os.str();
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

void write_file_atomic(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary);
    if (!os) throw InputError("cannot open " + tmp + " for writing");
    os << content;
    if (!os) throw InputError("short write to " + tmp);
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0) {
    throw InputError("cannot rename " + tmp + " to " + path);
  }
}

double relative_l2_error(const std::vector<double>& u,
                         const std::vector<double>& ref) {
  if (u.size() != ref.size()) {
    throw InputError("relative_l2_error: length mismatch");
  }
  double num = 0.0, den = 0.0;
  for (size_t i = 0; i < u.size(); ++i) {
    const double d = u[i] - ref[i];
    num += d * d;
    den += ref[i] * ref[i];
  }
  return den > 0.0 ? std::sqrt(num / den) : std::sqrt(num);
}

RunConfig RunConfig::from_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw InputError("cannot open config file " + path);
  RunConfig cfg;
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      throw InputError(path + ":" + std::to_string(lineno) +
                       ": expected key=value");
    }
    cfg.set(trim(t.substr(0, eq)), trim(t.substr(eq + 1)));
  }
  return cfg;
}

void RunConfig::set(const std::string& key, const std::string& value) {
  if (key == "problem") {
    problem = value;
  } else if (key == "backend") {
    backend = value;
  } else if (key == "n") {
    n = parse_int(key, value);
  } else if (key == "eps") {
    eps = parse_double(key, value);
  } else if (key == "medium") {
    medium = value;
  } else if (key == "mu_s" || key == "mu-s") {
    mu_s = parse_double(key, value);
  } else if (key == "mu_a" || key == "mu-a") {
    mu_a = parse_double(key, value);
  } else if (key == "rho") {
    rho = parse_double(key, value);
  } else if (key == "phase") {
    phase = value;
  } else if (key == "phase_a" || key == "phase-a") {
    phase_a = parse_double(key, value);
  } else if (key == "modes") {
    modes.clear();
    std::stringstream ss(value);
    std::string item;
    while (std::getline(ss, item, ',')) {
      modes.push_back(parse_int(key, trim(item)));
    }
    if (modes.empty()) throw InputError("modes list is empty");
  } else if (key == "source") {
    std::string v = value;
    if (!v.empty() && (v[0] == 'f' || v[0] == 'F')) v = v.substr(1);
    source = parse_int(key, v);
  } else if (key == "out_dir" || key == "out-dir") {
    out_dir = value;
  } else if (key == "write_solution") {
    write_solution = parse_bool(key, value);
  } else if (key == "write_report") {
    write_report = parse_bool(key, value);
  } else if (key == "write_plot" || key == "plot") {
    write_plot = parse_bool(key, value);
  } else if (key == "compute_error") {
    compute_error = parse_bool(key, value);
  } else if (key == "seed") {
    seed = static_cast<unsigned>(parse_int(key, value));
  } else {
    throw InputError("unknown config key '" + key + "'");
  }
}

void RunConfig::validate() const {
  if (problem != "iso" && problem != "aniso") {
    throw InputError("problem must be iso or aniso, got '" + problem + "'");
  }
  if (backend != "dense" && backend != "fft" && backend != "rsf") {
    throw InputError("backend must be dense, fft, or rsf, got '" + backend + "'");
  }
  if (n < 2) throw InputError("n must be at least 2");
  if (!(eps > 0.0)) throw InputError("eps must be positive");
  if (medium != "homogeneous" && medium != "bump" && medium != "forward") {
    throw InputError("medium must be homogeneous, bump, or forward, got '" +
                     medium + "'");
  }
  if (phase != "isotropic" && phase != "two-term" && phase != "forward") {
    throw InputError("phase must be isotropic, two-term, or forward, got '" +
                     phase + "'");
  }
  if (backend == "fft" && medium != "homogeneous") {
    throw InputError("fft backend requires a homogeneous medium");
  }
  if (source < 1 || source > 3) {
    throw InputError("source must be 1, 2, or 3");
  }
  if (problem == "aniso") {
    make_modes();  // enforces 0 in the set
  }
}

Medium RunConfig::make_medium() const {
  if (medium == "homogeneous") {
    return Medium::homogeneous(mu_s, mu_s + mu_a);
  }
  if (medium == "bump") {
    return Medium::gaussian_bump(rho, mu_a);
  }
  // forward: mu_s = 1 + 2*rho*g, g the central Gaussian the forward-peaked
  // phase is scaled by; sup attained at the center.
  const double r = rho;
  const double a = mu_a;
  auto g = [](const Vec2& p) {
    const double dx = p.x - 0.5, dy = p.y - 0.5;
    return std::exp(-(dx * dx + dy * dy) / 4.0);
  };
  auto ms = [r, g](const Vec2& p) { return 1.0 + 2.0 * r * g(p); };
  auto mt = [r, a, g](const Vec2& p) { return 1.0 + 2.0 * r * g(p) + a; };
  return Medium::from_fields(ms, mt, 1.0 + 2.0 * r);
}

PhaseFunction RunConfig::make_phase() const {
  if (medium == "forward" || phase == "forward") {
    return PhaseFunction::scaled_forward(rho);
  }
  if (phase == "two-term") return PhaseFunction::two_term(phase_a);
  return PhaseFunction::isotropic();
}

ModeSet RunConfig::make_modes() const { return ModeSet::from_list(modes); }

std::string RunConfig::slug() const {
  std::ostringstream os;
  os << problem << '-' << backend << "-n" << n << "-eps" << eps_tag(eps);
  if (medium == "homogeneous") {
    os << "-mus" << format_double(mu_s);
  } else {
    os << '-' << medium << "-rho" << format_double(rho);
  }
  os << "-f" << source;
  return os.str();
}

namespace {

struct BackendOutput {
  std::vector<double> u;
  std::optional<ModalSolution> modal;
  double t_pre = 0.0;
  double t_sol = 0.0;
  int iterations = 0;
};

double median3(double a, double b, double c) {
  return std::max(std::min(a, b), std::min(std::max(a, b), c));
}

// T_pre covers assembly/symbol/factorization, T_sol one right-hand side
// (median of 3 identical solves on a monotonic clock).
BackendOutput run_backend(const RunConfig& cfg, const Grid& grid,
                          const Medium& medium, const std::vector<double>& f) {
  BackendOutput out;
  const bool aniso = cfg.problem == "aniso";

  if (cfg.backend == "dense") {
    double t0 = now_seconds();
    const DenseSystem sys =
        aniso ? DenseSystem::assemble_aniso(grid, medium, cfg.make_phase(),
                                            cfg.make_modes())
              : DenseSystem::assemble_iso(grid, medium);
    out.t_pre = now_seconds() - t0;
    double ts[3];
    for (int r = 0; r < 3; ++r) {
      t0 = now_seconds();
      if (aniso) {
        ModalSolution modal = sys.solve_modal(f);
        ts[r] = now_seconds() - t0;
        if (r == 0) {
          out.u = modal.mode0_real();
          out.modal = std::move(modal);
        }
      } else {
        DenseSolveResult res = sys.solve(f);
        ts[r] = now_seconds() - t0;
        if (r == 0) out.u = std::move(res.u);
      }
    }
    out.t_sol = median3(ts[0], ts[1], ts[2]);
    return out;
  }

  if (cfg.backend == "fft") {
    KrylovConfig kcfg;
    kcfg.tol = cfg.eps;
    double t0 = now_seconds();
    const CirculantSymbol symbol =
        aniso ? CirculantSymbol::build_aniso(grid, medium, cfg.make_phase(),
                                             cfg.make_modes())
              : CirculantSymbol::build_iso(grid, medium);
    out.t_pre = now_seconds() - t0;
    double ts[3];
    for (int r = 0; r < 3; ++r) {
      t0 = now_seconds();
      FftSolveResult res = solve_fft(symbol, medium, f, kcfg);
      ts[r] = now_seconds() - t0;
      if (r == 0) {
        out.u = std::move(res.u);
        out.modal = std::move(res.modal);
        out.iterations = res.stats.iterations;
      }
    }
    out.t_sol = median3(ts[0], ts[1], ts[2]);
    return out;
  }

  RsfOptions opt;
  opt.eps = cfg.eps;
  double t0 = now_seconds();
  const RsfSolver solver =
      aniso ? RsfSolver(grid, medium, cfg.make_phase(), cfg.make_modes(), opt)
            : RsfSolver(grid, medium, opt);
  out.t_pre = now_seconds() - t0;
  double ts[3];
  for (int r = 0; r < 3; ++r) {
    t0 = now_seconds();
    RsfSolveResult res = solver.solve(f);
    ts[r] = now_seconds() - t0;
    if (r == 0) {
      out.u = std::move(res.u);
      out.modal = std::move(res.modal);
    }
  }
  out.t_sol = median3(ts[0], ts[1], ts[2]);
  return out;
}

// Reference: dense while it fits; beyond that the tight-tolerance fast
// backend that applies (fft for homogeneous media, rsf otherwise).
struct Reference {
  std::vector<double> u;
  std::string name;
};

Reference compute_reference(const RunConfig& cfg, const Grid& grid,
                            const Medium& medium, const std::vector<double>& f,
                            const BackendOutput& own) {
  Reference ref;
  if (cfg.n <= 32) {
    ref.name = "dense";
    if (cfg.backend == "dense") {
      ref.u = own.u;  // the reference is this very solve
      return ref;
    }
    RunConfig dcfg = cfg;
    dcfg.backend = "dense";
    ref.u = run_backend(dcfg, grid, medium, f).u;
    return ref;
  }
  RunConfig rcfg = cfg;
  if (cfg.medium == "homogeneous") {
    rcfg.backend = "fft";
    rcfg.eps = 1e-12;
    ref.name = "fft@1e-12";
  } else {
    rcfg.backend = "rsf";
    rcfg.eps = 1e-10;
    ref.name = "rsf@1e-10";
  }
  if (cfg.backend == rcfg.backend && cfg.eps == rcfg.eps) {
    ref.u = own.u;
    return ref;
  }
  ref.u = run_backend(rcfg, grid, medium, f).u;
  return ref;
}

std::string solution_csv(const Grid& grid, const BackendOutput& out) {
  std::ostringstream os;
  const int n = grid.n();
  if (out.modal) {
    os << "i1,i2,x1,x2,u,k,re,im\n";
    const ModalSolution& modal = *out.modal;
    for (int m = 0; m < modal.modes().count(); ++m) {
      for (int i = 0; i < grid.size(); ++i) {
        const Vec2& c = grid.center(i);
        const Complex v = modal.at(i, m);
        os << i % n << ',' << i / n << ',' << format_double(c.x) << ','
           << format_double(c.y) << ',' << format_double(out.u[static_cast<size_t>(i)])
           << ',' << modal.modes().mode(m) << ',' << format_double(v.real())
           << ',' << format_double(v.imag()) << '\n';
      }
    }
  } else {
    os << "i1,i2,x1,x2,u\n";
    for (int i = 0; i < grid.size(); ++i) {
      const Vec2& c = grid.center(i);
      os << i % n << ',' << i / n << ',' << format_double(c.x) << ','
         << format_double(c.y) << ','
         << format_double(out.u[static_cast<size_t>(i)]) << '\n';
    }
  }
  return os.str();
}

std::string report_header() {
  return "problem,backend,n,eps,medium,mu_s,mu_a,rho,phase,source,modes,"
         "t_pre,t_sol,iterations,error,reference,status";
}

std::string report_row(const RunConfig& cfg, const RunResult& res,
                       const std::string& status) {
  std::ostringstream os;
  os << cfg.problem << ',' << cfg.backend << ',' << cfg.n << ','
     << format_double(cfg.eps) << ',' << cfg.medium << ','
     << format_double(cfg.mu_s) << ',' << format_double(cfg.mu_a) << ','
     << format_double(cfg.rho) << ',' << cfg.phase << ",f" << cfg.source << ','
     << join_modes(cfg.modes) << ',';
  char tbuf[64];
  std::snprintf(tbuf, sizeof(tbuf), "%.6f,%.6f", res.t_pre, res.t_sol);
  os << tbuf << ',' << res.iterations << ',';
  if (res.error) os << format_double(*res.error);
  os << ',' << res.reference << ',' << status;
  return os.str();
}

}  // namespace

RunResult run(const RunConfig& cfg) {
  cfg.validate();
  const Grid grid(cfg.n);
  const Medium medium = cfg.make_medium();
  const std::vector<double> f = make_source(cfg.source, grid);

  BackendOutput out = run_backend(cfg, grid, medium, f);

  RunResult res;
  res.t_pre = out.t_pre;
  res.t_sol = out.t_sol;
  res.iterations = out.iterations;

  if (cfg.compute_error) {
    const Reference ref = compute_reference(cfg, grid, medium, f, out);
    res.error = relative_l2_error(out.u, ref.u);
    res.reference = ref.name;
  }

  namespace fs = std::filesystem;
  if (cfg.write_solution || cfg.write_report || cfg.write_plot) {
    fs::create_directories(cfg.out_dir);
  }
  const std::string stem = (fs::path(cfg.out_dir) / cfg.slug()).string();
  if (cfg.write_solution) {
    res.solution_path = stem + "-solution.csv";
    write_file_atomic(res.solution_path, solution_csv(grid, out));
  }
  if (cfg.write_report) {
    res.report_path = stem + "-report.csv";
    write_file_atomic(res.report_path,
                      report_header() + "\n" + report_row(cfg, res, "ok") + "\n");
  }
  if (cfg.write_plot) {
    res.plot_path = stem + ".png";
    write_field_png(res.plot_path, grid, out.u);
  }

  res.u = std::move(out.u);
  res.modal = std::move(out.modal);
  return res;
}

std::string sweep(const RunConfig& base, const SweepAxes& axes,
                  const std::string& table_name) {
  const std::vector<int> ns = axes.n.empty() ? std::vector<int>{base.n} : axes.n;
  const std::vector<double> epss =
      axes.eps.empty() ? std::vector<double>{base.eps} : axes.eps;
  const std::vector<double> rhos =
      axes.rho.empty() ? std::vector<double>{base.rho} : axes.rho;

  std::ostringstream table;
  table << report_header() << '\n';
  for (int n : ns) {
    for (double eps : epss) {
      for (double rho : rhos) {
        RunConfig cfg = base;
        cfg.n = n;
        cfg.eps = eps;
        cfg.rho = rho;
        cfg.write_solution = false;
        cfg.write_report = false;
        cfg.write_plot = false;
        RunResult res;
        std::string status = "ok";
        try {
          res = run(cfg);
        } catch (const std::exception& e) {
          std::string what = e.what();
          std::replace(what.begin(), what.end(), ',', ';');
          std::replace(what.begin(), what.end(), '\n', ' ');
          status = what;
        }
        table << report_row(cfg, res, status) << '\n';
      }
    }
  }

  namespace fs = std::filesystem;
  fs::create_directories(base.out_dir);
  const std::string path =
      (fs::path(base.out_dir) / (table_name + ".csv")).string();
  write_file_atomic(path, table.str());
  return path;
}

bool check_suite(const std::string& out_dir, std::string* summary) {
  std::ostringstream lines;   // human-readable
  std::ostringstream jsonl;   // machine-readable
  bool all = true;

  auto record_iso = [&](const std::string& label, const Medium& medium, int n,
                        int source_id) {
    const Grid grid(n);
    const AnalysisReport rep =
        analyze_iso(grid, medium, make_source(source_id, grid));
    all = all && rep.pass();
    lines << (rep.pass() ? "PASS" : "FAIL") << "  " << label
          << "  C=" << format_double(rep.contraction)
          << " max_row_sum=" << format_double(rep.row_sum.max_row_sum)
          << " min_eig="
          << (rep.min_eig ? format_double(*rep.min_eig) : std::string("n/a"))
          << " richardson_ratio=" << format_double(rep.richardson.max_ratio)
          << '\n';
    jsonl << "{\"config\":\"" << label << "\",\"report\":" << rep.to_json()
          << "}\n";
    return rep;
  };

  const AnalysisReport hom16 =
      record_iso("iso-hom-n16", Medium::homogeneous(1.0, 1.2), 16, 1);
  const AnalysisReport hom32 =
      record_iso("iso-hom-n32", Medium::homogeneous(1.0, 1.2), 32, 1);
  record_iso("iso-bump-rho1-n16", Medium::gaussian_bump(1.0, 0.2), 16, 2);

  // Row sums of successive grids must agree to the discretization tolerance.
  {
    const double diff =
        std::abs(hom16.row_sum.max_row_sum - hom32.row_sum.max_row_sum);
    const bool ok = diff <= 0.01;
    all = all && ok;
    lines << (ok ? "PASS" : "FAIL") << "  row-sum-consistency-n16-n32  diff="
          << format_double(diff) << '\n';
    jsonl << "{\"config\":\"row-sum-consistency\",\"diff\":"
          << format_double(diff) << ",\"pass\":" << (ok ? "true" : "false")
          << "}\n";
  }

  // Hermitian-part definiteness of the anisotropic system.
  {
    const Grid grid(8);
    const Medium medium = Medium::homogeneous(1.0, 1.2);
    const DenseSystem sys = DenseSystem::assemble_aniso(
        grid, medium, PhaseFunction::two_term(0.2), ModeSet::from_list({-1, 0, 1}));
    const double eig = spd_probe(sys);
    const bool ok = eig > 0.0;
    all = all && ok;
    lines << (ok ? "PASS" : "FAIL") << "  aniso-herm-min-eig-n8  min_eig="
          << format_double(eig) << '\n';
    jsonl << "{\"config\":\"aniso-herm-min-eig-n8\",\"min_eig\":"
          << format_double(eig) << ",\"pass\":" << (ok ? "true" : "false")
          << "}\n";
  }

  // The contraction constant grows with the scattering sup.
  {
    bool ok = true;
    double prev = -1.0;
    for (double ms : {0.0, 0.5, 1.0, 2.0, 5.0}) {
      const double c = contraction_constant(Medium::homogeneous(ms, ms + 0.2));
      ok = ok && c > prev && c >= 0.0 && c < 1.0;
      prev = c;
    }
    all = all && ok;
    lines << (ok ? "PASS" : "FAIL") << "  contraction-monotone\n";
    jsonl << "{\"config\":\"contraction-monotone\",\"pass\":"
          << (ok ? "true" : "false") << "}\n";
  }

  std::filesystem::create_directories(out_dir);
  const std::string path =
      (std::filesystem::path(out_dir) / "check_report.jsonl").string();
  write_file_atomic(path, jsonl.str());
  if (summary) *summary = lines.str();
  return all;
}

std::string repro(const std::string& preset, const std::string& out_dir,
                  int n_override) {
  RunConfig base;
  base.out_dir = out_dir;
  SweepAxes axes;
  axes.eps = {1e-4, 1e-6, 1e-8};

  if (preset == "table-iso-con-err") {
    base.problem = "iso";
    base.backend = "fft";
    base.medium = "homogeneous";
    base.mu_s = 1.0;
    base.mu_a = 0.2;
    base.source = 1;
    axes.n = {16, 32, 64};
  } else if (preset == "table-iso-var-err") {
    base.problem = "iso";
    base.backend = "rsf";
    base.medium = "bump";
    base.rho = 1.0;
    base.mu_a = 0.2;
    base.source = 1;
    axes.n = {16, 32, 64};
  } else if (preset == "table-ani-con-err") {
    base.problem = "aniso";
    base.backend = "fft";
    base.medium = "homogeneous";
    base.mu_s = 1.0;
    base.mu_a = 0.2;
    base.phase = "two-term";
    base.phase_a = 0.2;
    base.modes = {-1, 0, 1};
    base.source = 1;
    axes.n = {8, 16, 32};
  } else if (preset == "table-ani-var-mus") {
    base.problem = "aniso";
    base.backend = "rsf";
    base.medium = "forward";
    base.mu_a = 0.2;
    base.modes = {-1, 0, 1};
    base.source = 1;
    base.n = 64;
    axes.n = {64};
    axes.eps = {1e-6};
    axes.rho = {1.0, 5.0, 10.0};
  } else {
    throw InputError("unknown repro preset '" + preset +
                     "' (expected table-iso-con-err, table-iso-var-err, "
                     "table-ani-con-err, or table-ani-var-mus)");
  }

  if (n_override > 0) axes.n = {n_override};
  return sweep(base, axes, preset);
}

}  // namespace rte
