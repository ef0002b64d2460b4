// Acceptance suite: one PASS/FAIL line per criterion.
//   jdsn_acceptance            run all eight
//   jdsn_acceptance --only N   run criterion N

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "jdsn/cli/commands.hpp"
#include "jdsn/estimate/contrast.hpp"
#include "jdsn/estimate/estimator.hpp"
#include "jdsn/estimate/filter.hpp"
#include "jdsn/fisher/information.hpp"
#include "jdsn/mcstudy/ladder.hpp"
#include "jdsn/mcstudy/normality.hpp"
#include "jdsn/mcstudy/study.hpp"
#include "jdsn/model/builtin.hpp"
#include "jdsn/simulate/rng.hpp"
#include "jdsn/simulate/simulate.hpp"

using namespace jdsn;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

constexpr model::DensityKind kFamilies[] = {
    model::DensityKind::Normal, model::DensityKind::Gamma, model::DensityKind::InverseGaussian,
    model::DensityKind::Weibull, model::DensityKind::LogNormal};

std::string fmt(double v, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return buf;
}

template <class Gen>
Vector draw_alpha(model::DensityKind k, Gen& gen) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const auto in = [&](double lo, double hi) { return lo + (hi - lo) * u(gen); };
  switch (k) {
    case model::DensityKind::Normal: return Vector{{in(-3.0, 3.0), in(0.3, 3.0)}};
    case model::DensityKind::Gamma: return Vector{{in(0.3, 3.0), in(1.2, 6.0)}};
    case model::DensityKind::InverseGaussian: return Vector{{in(0.3, 3.0), in(0.3, 10.0)}};
    case model::DensityKind::Weibull: return Vector{{in(0.3, 3.0), in(1.2, 6.0)}};
    case model::DensityKind::LogNormal: return Vector{{in(-1.0, 1.0), in(0.2, 1.5)}};
  }
  return {};
}

model::ParameterPoint ou_gamma_theta0() {
  return {Vector::Constant(1, 1.0), Vector::Constant(1, 1.0), Vector{{1.0, 2.0}}};
}

model::RegimeConfig make_regime(int n, double inv_eps, double lambda) {
  model::RegimeConfig r;
  r.n = n;
  r.epsilon = 1.0 / inv_eps;
  r.lambda = lambda;
  r.rho = 0.2;
  r.v = 1.0;
  return r;
}

// |analytic - fd| / (1 + |analytic|)
double rel_err(double analytic, double fd) {
  return std::abs(analytic - fd) / (1.0 + std::abs(analytic));
}

Outcome criterion_1() {
  std::mt19937_64 gen(20241);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst = 0.0;
  std::string where;
  std::size_t points = 0;
  for (auto k : kFamilies) {
    const auto m = model::make_ou_tanh_model(model::JumpDensityFamily::make(k));
    for (int rep = 0; rep < 1000; ++rep) {
      Vector a(3);
      a.head(2) = draw_alpha(k, gen);
      a[2] = -0.8 + 1.6 * u(gen);
      const double x = -1.0 + 2.0 * u(gen);
      const double c = m.jump_scale(x, a);
      const auto p = m.density.native(a);
      const double z = k == model::DensityKind::Normal
                           ? p[0] + p[1] * (-2.0 + 4.0 * u(gen))
                           : model::family_mean(k, p) * (0.2 + 2.0 * u(gen));
      const double y = c * z;
      const auto d = model::psi_derivatives(m, x, y, a);
      const auto note = [&](double e, const char* what) {
        if (e > worst) {
          worst = e;
          where = std::string(model::family_id(k)) + " " + what;
        }
      };
      const double hy = 1e-6 * std::max(1.0, std::abs(y));
      note(rel_err(d.dy, (model::psi(m, x, y + hy, a) - model::psi(m, x, y - hy, a)) / (2 * hy)),
           "dy");
      for (Eigen::Index j = 0; j < 3; ++j) {
        const double h = 1e-6 * std::max(1.0, std::abs(a[j]));
        Vector ap = a, am = a;
        ap[j] += h;
        am[j] -= h;
        note(rel_err(d.dalpha[j], (model::psi(m, x, y, ap) - model::psi(m, x, y, am)) / (2 * h)),
             "dalpha");
        const Vector fdh = (model::psi_derivatives(m, x, y, ap).dalpha -
                            model::psi_derivatives(m, x, y, am).dalpha) / (2 * h);
        for (Eigen::Index i = 0; i < 3; ++i) note(rel_err(d.dalpha2(i, j), fdh[i]), "dalpha2");
        note(rel_err(d.dy_dalpha[j], (model::psi_derivatives(m, x, y + hy, a).dalpha[j] -
                                      model::psi_derivatives(m, x, y - hy, a).dalpha[j]) /
                                         (2 * hy)),
             "dy_dalpha");
      }
      ++points;
    }
  }
  return {worst <= 1e-6, std::to_string(points) + " points, worst relative error " + fmt(worst) +
                             " (" + where + ")"};
}

Outcome criterion_2() {
  std::mt19937_64 gen(20242);
  double worst = 0.0;
  for (auto k : kFamilies) {
    const auto m = model::make_ou_model(model::JumpDensityFamily::make(k));
    for (int rep = 0; rep < 3; ++rep) {
      const Vector a = draw_alpha(k, gen);
      worst = std::max(worst, fisher::zero_score_integral(m, 0.3, a).cwiseAbs().maxCoeff());
    }
    // jump scale depending on x and alpha
    const auto mt = model::make_ou_tanh_model(model::JumpDensityFamily::make(k));
    Vector a(3);
    a.head(2) = draw_alpha(k, gen);
    a[2] = 0.4;
    worst = std::max(worst, fisher::zero_score_integral(mt, 0.7, a).cwiseAbs().maxCoeff());
  }
  return {worst <= 1e-6, "max |integral| = " + fmt(worst)};
}

Outcome criterion_3() {
  const double i1 = 0.5 * (1.0 - std::exp(-2.0));
  const auto m = model::make_builtin_model("ou-gamma-scale");
  const model::ParameterPoint t{Vector::Constant(1, 1.0), Vector::Constant(1, 1.0),
                                Vector::Constant(1, 1.0)};
  const auto info = fisher::fisher_information(m, t);
  const double e1 = std::abs(info.I1(0, 0) - i1);
  const double e2 = std::abs(info.I2(0, 0) - 2.0);
  const double e3 = std::abs(info.I3(0, 0) - 2.0);

  // Sampling oracles with 10^6 draws.
  const auto [mc3, se3] = fisher::sampled_jump_information(m, t, 1000000, 777);
  const double z3 = std::abs(info.I3(0, 0) - mc3(0, 0)) / se3(0, 0);
  std::mt19937_64 gen(778);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double s = 0.0, s2 = 0.0;
  const int draws = 1000000;
  for (int i = 0; i < draws; ++i) {
    const double x = std::exp(-u(gen));  // limit path at a uniform time, a_mu = -x
    s += x * x;
    s2 += x * x * x * x;
  }
  const double mc1 = s / draws;
  const double se1 = std::sqrt((s2 / draws - mc1 * mc1) / draws);
  const double z1 = std::abs(info.I1(0, 0) - mc1) / se1;

  const bool pass = e1 <= 1e-6 && e2 <= 1e-6 && e3 <= 1e-6 && z1 <= 4.0 && z3 <= 4.0;
  return {pass, "I1=" + fmt(info.I1(0, 0), 12) + " I2=" + fmt(info.I2(0, 0), 12) + " I3=" +
                    fmt(info.I3(0, 0), 12) + "; MC z-scores I1 " + fmt(z1, 3) + ", I3 " +
                    fmt(z3, 3)};
}

Outcome criterion_4() {
  const auto m = model::make_builtin_model("ou-gamma");
  const auto base = make_regime(4000, 200.0, 30.0);
  std::size_t wrong = 0, total = 0;
  double ratio = 0.0;
  const int reps = 200;
  for (int i = 0; i < reps; ++i) {
    const auto r = mcstudy::replication_regime(base, 4004, static_cast<std::size_t>(i));
    const auto sim = simulate::simulate_path(m, ou_gamma_theta0(), r);
    const auto lab = estimate::classify_increments(sim.observations, r, m.density.support);
    for (std::size_t k = 0; k < lab.size(); ++k) {
      wrong += (lab.is_jump(k) != (sim.truth.interval_counts[k] > 0));
      ++total;
    }
    ratio += estimate::estimate_intensity(lab) / r.lambda;
  }
  ratio /= reps;
  const double mis = static_cast<double>(wrong) / static_cast<double>(total);
  return {ratio >= 0.9 && ratio <= 1.1 && mis <= 0.02,
          "mean(lambda_hat)/lambda = " + fmt(ratio) + ", misclassification = " + fmt(mis)};
}

Outcome criterion_5() {
  const auto m = model::make_builtin_model("ou-gamma");
  const std::vector<model::RegimeConfig> ladder = {
      make_regime(500, 50, 10), make_regime(2000, 100, 20), make_regime(8000, 200, 40)};
  const auto rep = mcstudy::consistency_ladder(m, ou_gamma_theta0(), ladder, 200, 5005);
  bool pass = true;
  std::string s = "shrink factors";
  for (Eigen::Index j = 0; j < rep.shrink.size(); ++j) {
    s += " " + fmt(rep.shrink[j], 3);
    pass = pass && rep.shrink[j] >= 1.5;
  }
  s += "; rung RMSE";
  for (const auto& r : rep.rungs) {
    s += " [";
    for (Eigen::Index j = 0; j < r.rmse.size(); ++j) s += (j ? " " : "") + fmt(r.rmse[j], 3);
    s += "]";
  }
  return {pass, s};
}

Outcome criterion_6() {
  const auto m = model::make_builtin_model("ou-gamma");
  const auto regime = make_regime(8000, 200, 40);
  const auto table = mcstudy::run_replications(m, ou_gamma_theta0(), regime, 500, 6006);
  const auto info = fisher::fisher_information(m, ou_gamma_theta0());
  const auto rep = mcstudy::normality_diagnostics(table, info);
  std::string s = "rows " + std::to_string(rep.rows_used) + "/" + std::to_string(rep.rows_total) +
                  ", relative covariance error " + fmt(rep.relative_cov_error, 3) + ", KS p";
  for (const auto& k : rep.ks) s += " " + fmt(k.p_value, 3);
  s += ", mean";
  for (Eigen::Index j = 0; j < rep.mean.size(); ++j) s += " " + fmt(rep.mean[j], 3);
  return {rep.relative_cov_error <= 0.25 && rep.ks_passes() >= 3, s};
}

Outcome criterion_7() {
  const auto m = model::make_builtin_model("ou-gamma");
  const auto base = make_regime(8000, 200, 40);
  const auto t0 = ou_gamma_theta0();
  const Matrix I = fisher::fisher_information(m, t0).assembled();
  const double inorm = I.cwiseAbs().rowwise().sum().maxCoeff();
  double with_hat = 0.0, with_true = 0.0;
  const int reps = 100;
  for (int i = 0; i < reps; ++i) {
    const auto r = mcstudy::replication_regime(base, 7007, static_cast<std::size_t>(i));
    const auto sim = simulate::simulate_path(m, t0, r);
    const auto lab = estimate::classify_increments(sim.observations, r, m.density.support);
    const double lam_hat = estimate::contrast_lambda(r, lab, estimate::LambdaMode::Estimated);
    const Matrix c_hat = fisher::observed_information(sim.observations, t0, lab, m, lam_hat);
    const Matrix c_true = fisher::observed_information(sim.observations, t0, lab, m, r.lambda);
    with_hat += (c_hat + I).cwiseAbs().rowwise().sum().maxCoeff() / inorm;
    with_true += (c_true + I).cwiseAbs().rowwise().sum().maxCoeff() / inorm;
  }
  with_hat /= reps;
  with_true /= reps;
  return {with_hat <= 0.15, "mean relative inf-norm " + fmt(with_hat, 3) +
                                " with lambda_hat = #D (" + fmt(with_true, 3) +
                                " with the true lambda)"};
}

std::map<std::string, std::string> read_dir(const fs::path& dir) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::directory_iterator(dir)) {
    std::ifstream in(e.path(), std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    out[e.path().filename().string()] = os.str();
  }
  return out;
}

Outcome criterion_8() {
  const fs::path work = fs::temp_directory_path() / "jdsn_acceptance_8";
  fs::remove_all(work);
  fs::create_directories(work);
  const cli::json cfg = {
      {"model", "ou-gamma"},
      {"theta0", {{"mu", {1.0}}, {"sigma", {1.0}}, {"alpha", {1.0, 2.0}}}},
      {"regime", {{"n", 500}, {"epsilon", 0.02}, {"lambda", 10}, {"rho", 0.2}, {"v", 1.0}}},
      {"reps", 120},
      {"seed", 8008}};
  std::ofstream(work / "config.json") << cfg.dump(2);
  const fs::path ladder_cfg = work / "ladder.json";
  {
    auto l = cfg;
    l["reps"] = 6;
    l["ladder"] = {cfg["regime"], {{"n", 2000}, {"epsilon", 0.01}, {"lambda", 20}, {"rho", 0.2}, {"v", 1.0}}};
    std::ofstream(ladder_cfg) << l.dump(2);
  }
  std::ostringstream log;
  const auto run = [&](const fs::path& config, const std::string& out, int workers) {
    cli::RunOptions o;
    o.out_dir = (work / out).string();
    o.workers = workers;
    o.log = &log;
    return cli::run_command("mc", config.string(), std::nullopt, o);
  };
  bool ok = run(work / "config.json", "w1", 1) == 0;
  ok = ok && run(work / "config.json", "w4", 4) == 0;
  ok = ok && run(work / "w1" / "manifest.json", "manifest_w3", 3) == 0;
  ok = ok && run(ladder_cfg, "ladder_w1", 1) == 0;
  ok = ok && run(work / "ladder_w1" / "manifest.json", "ladder_w4", 4) == 0;
  if (!ok) return {false, "a run failed: " + log.str()};
  const auto a = read_dir(work / "w1");
  const bool same = a == read_dir(work / "w4") && a == read_dir(work / "manifest_w3") &&
                    read_dir(work / "ladder_w1") == read_dir(work / "ladder_w4");
  return {same, std::to_string(a.size()) + " files per single-regime run compared across 1, 4 and 3 "
                "workers (config and manifest reruns), plus a ladder run on 1 and 4 workers"};
}

struct Criterion {
  const char* name;
  double budget_s;  // wall-clock limit; 0 for none
  std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> all = {
      {"derivative coherence", 10, criterion_1},
      {"zero-score identity", 10, criterion_2},
      {"information oracles", 30, criterion_3},
      {"filter fidelity", 120, criterion_4},
      {"consistency ladder", 600, criterion_5},
      {"asymptotic normality", 900, criterion_6},
      {"observed information", 300, criterion_7},
      {"determinism", 0, criterion_8},
  };
  int only = 0;
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if (a == "--only" && i + 1 < argc) {
      only = std::atoi(argv[++i]);
    } else {
      std::cerr << "usage: jdsn_acceptance [--only N]\n";
      return 2;
    }
  }
  if (only < 0 || only > static_cast<int>(all.size())) {
    std::cerr << "criterion must be 1.." << all.size() << '\n';
    return 2;
  }
  int failures = 0;
  for (std::size_t i = 0; i < all.size(); ++i) {
    if (only != 0 && static_cast<int>(i) + 1 != only) continue;
    const auto& c = all[i];
    const auto start = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = c.run();
    } catch (const std::exception& e) {
      out = {false, std::string("error: ") + e.what()};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_time = c.budget_s == 0 || secs <= c.budget_s;
    const bool pass = out.pass && in_time;
    failures += !pass;
    std::cout << (pass ? "PASS" : "FAIL") << " criterion " << i + 1 << " (" << c.name << "): "
              << out.detail << "; " << fmt(secs, 3) << " s"
              << (in_time ? "" : " exceeds budget of " + fmt(c.budget_s) + " s") << std::endl;
  }
  return failures == 0 ? 0 : 1;
}
