// nmq -- pseudo-spectral simulator for the coupled Navier-Stokes / Q-tensor
// system with the Ball-Majumdar singular potential.
#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>

#include "nmq/comparison.hpp"
#include "nmq/diagnostics.hpp"
#include "nmq/dynamics.hpp"
#include "nmq/errors.hpp"
#include "nmq/io.hpp"
#include "nmq/scenarios.hpp"
#include "nmq/verify.hpp"

namespace fs = std::filesystem;
using namespace nmq;

namespace {

std::string now_iso() {
  const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  char buf[64];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
  return buf;
}

std::string snap_name(long long step) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "snap_%08lld.nmq", step);
  return buf;
}

template <int D>
int do_simulate(SimConfig cfg, const std::string& init, const std::string& restart) {
  auto pot = make_potential_model<D>(cfg);
  Stepper<D> st(cfg, pot);
  fs::create_directories(cfg.output_dir);

  RunManifest man;
  man.config = cfg;
  man.code_version = code_version();
  man.started = now_iso();
  man.exit_status = "running";
  write_manifest(cfg.output_dir, man);

  State<D> s0;
  if (!restart.empty()) {
    s0 = read_state_snapshot<D>(restart, st);
  } else if (!init.empty()) {
    s0 = read_state_snapshot<D>(init, st);
    s0.t = 0;
    s0.step = 0;
  } else {
    const Transformer& tr = st.transformer();
    RealField q0 = random_q_field(tr, cfg.seed, 4, 0.08);
    RealField u0 = random_velocity(tr, cfg.seed + 0x9e3779b97f4a7c15ull, 4, 0.4);
    s0 = st.make_state(q0, u0);
  }

  EnergyCsvWriter csv((fs::path(cfg.output_dir) / "energy.csv").string());
  RunHooks<D> hooks;
  hooks.on_record = [&](const State<D>&, const EnergyRecord& r) { csv.push(r); };
  hooks.on_snapshot = [&](const State<D>& s, const RealField& q, const RealField& u) {
    const std::string name = snap_name(s.step);
    write_state_snapshot((fs::path(cfg.output_dir) / name).string(), st.grid(), s.t, q, u);
    man.checkpoints.push_back(name);
    write_manifest(cfg.output_dir, man);
  };

  try {
    run(st, s0, hooks);
    csv.finish();
    man.exit_status = "ok";
    man.finished = now_iso();
    write_manifest(cfg.output_dir, man);
  } catch (const Error& e) {
    csv.finish();
    man.exit_status = e.what();
    man.finished = now_iso();
    write_manifest(cfg.output_dir, man);
    std::fprintf(stderr, "[dynamics] %s\n", e.what());
    return 1;
  }
  std::printf("simulate: ok, output in %s\n", cfg.output_dir.c_str());
  return 0;
}

template <int D>
int do_certify(const RunManifest& man, const std::string& dir, int N,
               const std::string& out) {
  SimConfig cfg = man.config;
  if (N != cfg.N)
    throw ConfigMismatch("certificate N = " + std::to_string(N) +
                         " differs from trajectory N = " + std::to_string(cfg.N));
  Stepper<D> st(cfg, make_potential_model<D>(cfg));
  if (man.checkpoints.empty()) throw ConfigMismatch("trajectory has no checkpoints");
  State<D> s0 = read_state_snapshot<D>((fs::path(dir) / man.checkpoints.front()).string(), st);
  if (s0.step != 0) throw ConfigMismatch("first checkpoint is not the initial state");

  // replay cross-check: stored checkpoints must be reproduced bit-exactly
  std::map<long long, std::string> by_step;
  for (const auto& name : man.checkpoints) {
    long long step = 0;
    if (std::sscanf(name.c_str(), "snap_%lld.nmq", &step) == 1) by_step[step] = name;
  }
  const auto on_checkpoint = [&](long long step, const RealField& q, const RealField& u) {
    auto it = by_step.find(step);
    if (it == by_step.end()) return;
    const Snapshot stored = read_snapshot((fs::path(dir) / it->second).string());
    if (stored.data.size() != q.v.size() + u.v.size() ||
        std::memcmp(stored.data.data(), q.v.data(), q.v.size() * sizeof(double)) != 0 ||
        std::memcmp(stored.data.data() + q.v.size(), u.v.data(),
                    u.v.size() * sizeof(double)) != 0)
      throw ConfigMismatch("replay diverged from stored checkpoint " + it->second);
  };

  const CertificateReport rep = certify<D>(st, s0, on_checkpoint);

  std::ofstream f(out, std::ios::trunc);
  f << "t,defect_sup,psi_sup,G_sup,Hc_sup\n";
  for (const auto& r : rep.rows)
    f << r.t << ',' << r.defect_sup << ',' << r.psi_sup << ',' << r.g_sup << ','
      << r.hc_sup << '\n';

  std::printf("certify: max defect %.6g (tolerance %.6g) -> %s\n", rep.max_defect,
              rep.tol, rep.pass ? "PASS" : "FAIL");
  std::printf("certify: |Hc|_inf measured %.6g, p->inf bound %.6g\n",
              rep.hc_linf_measured, rep.hc_linf_bound);
  return rep.pass ? 0 : 1;
}

int do_potential_table(int dim, int resolution, const std::string& out) {
  std::ofstream f(out, std::ios::trunc);
  if (!f) throw CorruptFile("cannot open '" + out + "'");
  f.precision(15);
  if (dim == 2) {
    BallMajumdar<2> bm;
    f << "lambda1,psi,mu1,mu2,logZ\n";
    for (int k = 1; k < resolution; ++k) {
      const double l1 = -0.5 + static_cast<double>(k) / resolution;
      if (margin_of<2>({std::min(l1, -l1), std::max(l1, -l1)}) <= 1e-8) continue;
      const auto e = bm.eval_eigs({l1, -l1});
      f << l1 << ',' << e.psi << ',' << e.mu[0] << ',' << e.mu[1] << ',' << e.logZ << '\n';
    }
  } else {
    BallMajumdar<3> bm;
    f << "lambda1,lambda2,psi,mu1,mu2,mu3,logZ\n";
    for (int i = 1; i < resolution; ++i)
      for (int j = 1; j < resolution; ++j) {
        const double l1 = -1.0 / 3 + static_cast<double>(i) / resolution;
        const double l2 = -1.0 / 3 + static_cast<double>(j) / resolution;
        std::array<double, 3> lam{l1, l2, -l1 - l2};
        std::sort(lam.begin(), lam.end());
        if (margin_of<3>(lam) <= 1e-8) continue;
        const auto e = bm.eval_eigs({l1, l2, -l1 - l2});
        f << l1 << ',' << l2 << ',' << e.psi << ',' << e.mu[0] << ',' << e.mu[1] << ','
          << e.mu[2] << ',' << e.logZ << '\n';
      }
  }
  std::printf("potential-table: wrote %s\n", out.c_str());
  return 0;
}

int do_taylor_green(double nu, double T, int n, double dt, double lambda, double amp) {
  SimConfig cfg;
  cfg.nu = nu;
  cfg.T = T;
  cfg.n = n;
  cfg.dt = dt;
  cfg.Lambda = lambda;
  Stepper<2> st(cfg, make_potential_model<2>(cfg));
  State<2> s = st.make_state(RealField(st.grid(), 2), taylor_green(st.grid(), amp));
  const double n0 = std::sqrt(l2norm2(s.uhat));
  for (long long k = 0; k < cfg.total_steps(); ++k) st.step(s);
  const double nT = std::sqrt(l2norm2(s.uhat));
  const double expected = n0 * std::exp(-taylor_green_decay_rate(st.grid(), nu) * T);
  const double rel = std::fabs(nT - expected) / expected;
  std::printf("taylor-green: |u(T)| = %.12g, analytic %.12g, rel error %.3g\n", nT,
              expected, rel);
  return rel <= 1e-6 ? 0 : 1;
}

template <int D>
int do_homogeneous(double T, double dt, int N) {
  SimConfig cfg;
  cfg.dim = D;
  cfg.N = N;
  cfg.dt = dt;
  cfg.T = T;
  std::shared_ptr<PotentialModel<D>> pot =
      (N == 0) ? make_potential_model<D>(cfg) : make_direct_mollified_model<D>(N);
  Sym0<D> q0;
  q0[0] = 0.25;
  q0[1] = -0.12;
  auto advance = [&](double h) {
    SimConfig c = cfg;
    c.dt = h;
    Sym0<D> q = q0;
    for (long long k = 0; k < std::llround(T / h); ++k)
      q = homogeneous_step<D>(q, c, *pot);
    return q;
  };
  const auto qT = advance(dt);
  const auto ref = advance(dt / 8);
  const auto e1 = advance(dt) - ref;
  const auto e2 = advance(dt / 2) - ref;
  const double ratio = fnorm(e1) / std::max(fnorm(e2), 1e-300);
  std::printf("homogeneous (d=%d, N=%d): |Q(T)| = %.12g, margin %.6g\n", D, N, fnorm(qT),
              physicality_margin(qT));
  std::printf("homogeneous: dt-halving error ratio %.3f (second order ~ 4)\n", ratio);
  return (ratio > 3.0 && ratio < 5.0) ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"coupled Navier-Stokes / Q-tensor pseudo-spectral simulator"};
  app.require_subcommand(1);

  std::string config_path, init_path, restart_path, out_path, traj_dir, suite;
  int cert_N = 16, table_dim = 3, table_res = 64;
  bool quick = false;
  double tg_nu = 0.1, tg_T = 1.0, tg_dt = 1e-3, tg_lambda = 1.0, tg_amp = 1.0;
  int tg_n = 64;
  double h_T = 1.0, h_dt = 1e-3;
  int h_dim = 2, h_N = 16;

  auto* sim = app.add_subcommand("simulate", "advance the coupled system");
  sim->add_option("--config", config_path, "config file")->required();
  sim->add_option("--init", init_path, "initial-state snapshot (t reset to 0)");
  sim->add_option("--restart", restart_path, "checkpoint to resume from");

  auto* cert = app.add_subcommand("certify", "strict-physicality comparison certificate");
  cert->add_option("--trajectory", traj_dir, "run directory from simulate")->required();
  cert->add_option("--N", cert_N, "certificate mollification index");
  cert->add_option("--out", out_path, "report csv path");

  auto* pt = app.add_subcommand("potential-table", "tabulate psi over the eigenvalue domain");
  pt->add_option("--dim", table_dim, "2 or 3")->required();
  pt->add_option("--resolution", table_res, "grid resolution")->required();
  pt->add_option("--out", out_path, "output csv")->required();

  auto* ver = app.add_subcommand("verify", "run the property suites");
  ver->add_option("suite", suite, "potential|spectral|dynamics|all")->required();
  ver->add_flag("--quick", quick, "reduced sample counts");

  auto* tg = app.add_subcommand("taylor-green", "viscous decay against the exact solution");
  tg->add_option("--nu", tg_nu);
  tg->add_option("--T", tg_T);
  tg->add_option("--n", tg_n);
  tg->add_option("--dt", tg_dt);
  tg->add_option("--lambda", tg_lambda);
  tg->add_option("--amplitude", tg_amp);

  auto* hom = app.add_subcommand("homogeneous", "spatially constant gradient flow");
  hom->add_option("--dim", h_dim);
  hom->add_option("--T", h_T);
  hom->add_option("--dt", h_dt);
  hom->add_option("--N", h_N, "mollification index (0 = exact psi)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;  // usage errors exit with 2, --help with 0
  }

  try {
    if (*sim) {
      const SimConfig cfg = parse_config(config_path);
      if (!init_path.empty() && !restart_path.empty())
        throw ValidationError("--init and --restart are mutually exclusive");
      return cfg.dim == 2 ? do_simulate<2>(cfg, init_path, restart_path)
                          : do_simulate<3>(cfg, init_path, restart_path);
    }
    if (*cert) {
      const RunManifest man = read_manifest(traj_dir);
      if (out_path.empty())
        out_path = (std::filesystem::path(traj_dir) / "report.csv").string();
      return man.config.dim == 2 ? do_certify<2>(man, traj_dir, cert_N, out_path)
                                 : do_certify<3>(man, traj_dir, cert_N, out_path);
    }
    if (*pt) {
      if (table_dim != 2 && table_dim != 3) throw ValidationError("dim");
      if (table_res < 4) throw ValidationError("resolution");
      return do_potential_table(table_dim, table_res, out_path);
    }
    if (*ver) {
      std::vector<CheckResult> checks;
      if (suite == "potential" || suite == "all") {
        auto c = verify_potential(quick);
        checks.insert(checks.end(), c.begin(), c.end());
      }
      if (suite == "spectral" || suite == "all") {
        auto c = verify_spectral(quick);
        checks.insert(checks.end(), c.begin(), c.end());
      }
      if (suite == "dynamics" || suite == "all") {
        auto c = verify_dynamics(quick);
        checks.insert(checks.end(), c.begin(), c.end());
      }
      if (checks.empty()) {
        std::fprintf(stderr, "unknown suite '%s'\n", suite.c_str());
        return 2;
      }
      const int failures = report_checks(checks);
      std::printf("verify: %d checks, %d failed\n", static_cast<int>(checks.size()),
                  failures);
      return failures == 0 ? 0 : 1;
    }
    if (*tg) return do_taylor_green(tg_nu, tg_T, tg_n, tg_dt, tg_lambda, tg_amp);
    if (*hom) {
      if (h_dim != 2 && h_dim != 3) throw ValidationError("dim");
      return h_dim == 2 ? do_homogeneous<2>(h_T, h_dt, h_N)
                        : do_homogeneous<3>(h_T, h_dt, h_N);
    }
  } catch (const ParseError& e) {
    std::fprintf(stderr, "[cli_io] %s\n", e.what());
    return 2;
  } catch (const ValidationError& e) {
    std::fprintf(stderr, "[cli_io] %s\n", e.what());
    return 2;
  } catch (const Error& e) {
    std::fprintf(stderr, "[nmq] %s\n", e.what());
    return 1;
  }
  return 2;
}
