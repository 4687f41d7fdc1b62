// Runs every acceptance criterion and prints one PASS/FAIL line each.
// Exit status is the number of failures.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numeric>
#include <string>
#include <vector>

#include "blindmatch/lap.hpp"
#include "blindmatch/pipeline.hpp"
#include "blindmatch/qap.hpp"
#include "blindmatch/subset.hpp"
#include "blindmatch/synthetic.hpp"
#include "test_util.hpp"

namespace {

using namespace blindmatch;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

// Average ranks, ties share the mean rank.
std::vector<double> ranks(const std::vector<double>& v) {
  std::vector<std::size_t> idx(v.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> r(v.size());
  for (std::size_t i = 0; i < idx.size();) {
    std::size_t j = i;
    while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
    for (std::size_t t = i; t <= j; ++t) r[idx[t]] = 0.5 * static_cast<double>(i + j);
    i = j + 1;
  }
  return r;
}

double spearman(const std::vector<double>& a, const std::vector<double>& b) {
  const auto ra = ranks(a), rb = ranks(b);
  const double n = static_cast<double>(a.size());
  const double mean = (n - 1) / 2;
  double sab = 0, saa = 0, sbb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (ra[i] - mean) * (rb[i] - mean);
    saa += (ra[i] - mean) * (ra[i] - mean);
    sbb += (rb[i] - mean) * (rb[i] - mean);
  }
  return sab / std::sqrt(saa * sbb);
}

Outcome dual_soundness() {
  Rng rng(1);
  int violations = 0;
  for (int t = 0; t < 200; ++t) {
    const std::size_t n = 4 + rng.below(7);
    const auto q = bmtest::random_qap(n, 10000 + t);
    HahnGrantConfig cfg;
    cfg.max_iters = 100;
    const auto r = solve_factorized_hahn_grant(q, cfg);
    const double opt = solve_enumeration(q).qap_primal;
    violations += !(r.qap_dual <= opt + 1e-9 && opt <= r.qap_primal + 1e-9);
  }
  return {violations == 0, fmt("%d violations in 200 instances", violations)};
}

Outcome global_optimality() {
  int certified = 0, primal_optimal = 0;
  for (std::uint64_t s = 0; s < 50; ++s) {
    CorrelatedConfig cc;
    cc.classes = 10;
    cc.seed = s;
    auto d = make_correlated_modalities(cc);
    const auto px = class_prototypes(normalize_rows(d.x), 0.5, s);
    const auto py = class_prototypes(normalize_rows(d.y), 0.5, s);
    const auto q = to_qap(gw_kernel(px), gw_kernel(py), DistortionSpec::squared_diff());
    const auto r = solve_factorized_hahn_grant(q, HahnGrantConfig{});
    const double opt = solve_enumeration(q).qap_primal;
    const bool at_opt = std::abs(r.qap_primal - opt) <= 1e-9 * std::max(1.0, std::abs(opt));
    primal_optimal += at_opt;
    certified += at_opt && r.converged && r.gap() <= 1e-6;
  }
  return {certified >= 45, fmt("certified %d/50 (need 45), primal optimal %d/50", certified, primal_optimal)};
}

Outcome reference_equivalence() {
  double worst = 0.0;
  for (int t = 0; t < 20; ++t) {
    const std::size_t n = 4 + t % 3;
    FactorizedQap q;
    if (t % 2 == 0) {
      q = bmtest::random_qap(n, 20000 + t);
    } else {
      Rng rng(20000 + t);
      q = to_qap(gw_kernel(bmtest::random_prototypes(n, 3, rng)), gw_kernel(bmtest::random_prototypes(n, 3, rng)),
                 DistortionSpec::squared_diff());
    }
    const int iters = 30;
    const auto ref = solve_hahn_grant_reference(expand_tensor(q), iters, -1.0);
    HahnGrantConfig cfg;
    cfg.primal_heuristic_seeds = 0;
    cfg.max_iters = iters;
    cfg.tol_abs = cfg.tol_rel = cfg.tol_gap = 1e-300;
    std::size_t step = 0;
    cfg.on_iteration = [&](const HahnGrantState& s) {
      if (step >= ref.trace.size()) return;
      const auto& r = ref.trace[step++];
      worst = std::max(worst, std::abs(s.bound() - r.bound));
      const Matrix leader = s.leader_solved();
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) worst = std::max(worst, std::abs(leader(i, j) - r.leader(i, j)));
    };
    solve_factorized_hahn_grant(q, cfg);
    if (step == 0) return {false, "no iterations compared"};
  }
  return {worst <= 1e-9, fmt("max |difference| %.3g over 20 instances", worst)};
}

Outcome gaussian_ablation() {
  double cost = 0.0, bound = 0.0;
  for (std::uint64_t s = 0; s < 5; ++s) {
    HahnGrantConfig cfg;
    cfg.time_limit = 600.0;
    const auto r = solve_factorized_hahn_grant(gaussian_ablation_qap(40, 1024, s), cfg);
    cost += r.primal_cost / 5;
    bound += r.dual_bound / 5;
  }
  const bool ok = std::abs(cost - (-1.9493)) <= 0.01 && std::abs(bound - (-1.9496)) <= 0.01;
  return {ok, fmt("mean cost %.6f (target -1.9493), mean bound %.6f (target -1.9496)", cost, bound)};
}

Outcome transport_identity() {
  Rng rng(5);
  double worst = 0.0;
  for (int t = 0; t < 100; ++t) {
    const std::size_t n = 3 + rng.below(8);
    const auto x = gw_kernel(bmtest::random_prototypes(n, 4, rng));
    const auto y = gw_kernel(bmtest::random_prototypes(n, 4, rng));
    const auto spec = DistortionSpec::squared_diff();
    Matrix m = bmtest::uniform_matrix(n, n, rng, 0.01, 1.0);
    const std::vector<double> marg(n, 1.0 / static_cast<double>(n));
    const Matrix coupling = sinkhorn_normalize(std::move(m), marg, marg, 2000);
    Matrix s = coupling;
    for (double& v : s.values()) v *= static_cast<double>(n);
    const double lhs = relaxed_qap_objective_direct(x, y, spec, s);
    const double rhs = static_cast<double>(n * n) * transport_objective(x, y, spec, coupling);
    worst = std::max(worst, std::abs(lhs - rhs) / std::max(std::abs(lhs), 1e-300));
  }
  int below = 0;
  for (int t = 0; t < 40; ++t) {
    const std::size_t n = 3 + t % 6;
    Rng r2(30000 + t);
    const auto x = gw_kernel(bmtest::random_prototypes(n, 3, r2));
    const auto y = gw_kernel(bmtest::random_prototypes(n, 3, r2));
    const auto q = to_qap(x, y, DistortionSpec::squared_diff());
    const auto e = solve_entropic_gw(x, y, DistortionSpec::squared_diff());
    below += q.objective(e.perm) < solve_enumeration(q).qap_primal - 1e-9;
  }
  return {worst <= 1e-9 && below == 0,
          fmt("max relative error %.3g on 100 couplings; entropic GW below optimum on %d/40", worst, below)};
}

Outcome shuffle_monotonicity() {
  ExperimentConfig cfg;
  cfg.kind = ExperimentKind::kShuffle;
  cfg.synthetic = SyntheticSource{};
  cfg.synthetic->correlated.classes = 100;
  cfg.shuffle.seeds = 100;
  const auto curves = run_shuffle_experiment(cfg);
  bool ok = curves.size() == 3;
  std::string detail;
  for (const auto& c : curves) {
    std::vector<double> alpha, mean;
    for (const auto& p : c.points) {
      alpha.push_back(p.alpha);
      mean.push_back(p.mean);
    }
    const double rho = spearman(alpha, mean);
    ok = ok && alpha.size() == 21 && rho == 1.0;
    detail += fmt("%s rho=%.4f ", std::string(to_string(c.kernel)).c_str(), rho);
  }
  return {ok, detail};
}

Outcome subset_oracle() {
  Rng rng(7);
  int equal = 0, exceeded = 0;
  for (int t = 0; t < 50; ++t) {
    const std::size_t l = 6 + rng.below(7);
    const std::size_t n = 2 + rng.below(4);
    const auto x = gw_kernel(bmtest::random_prototypes(l, 4, rng));
    const auto y = gw_kernel(bmtest::random_prototypes(l, 4, rng));
    const auto p = make_alignment_problem(x, y, DistortionSpec::squared_diff(), n);
    const double exact = select_subset_exact(p).score;
    const double heur = select_subset_heuristic(p).score;
    equal += std::abs(heur - exact) <= 1e-12 * std::max(1.0, std::abs(exact));
    exceeded += heur > exact + 1e-12 * std::max(1.0, std::abs(exact));
  }
  return {equal >= 45 && exceeded == 0, fmt("equal on %d/50 (need 45), exceeded %d", equal, exceeded)};
}

Outcome random_baseline() {
  double sum = 0.0;
  const auto gt = identity_permutation(10);
  for (std::uint64_t s = 0; s < 10000; ++s) {
    Rng rng(s);
    sum += matching_accuracy(random_permutation(10, rng), gt);
  }
  const double mean = sum / 10000;
  return {std::abs(mean - 0.10) <= 0.02, fmt("mean accuracy %.4f", mean)};
}

Outcome lap_layer() {
  Rng rng(9);
  int jv_wrong = 0, auction_wrong = 0;
  for (int t = 0; t < 200; ++t) {
    const std::size_t n = 1 + rng.below(8);
    const Matrix c = bmtest::uniform_matrix(n, n, rng);
    jv_wrong += solve_lap_jv(c).objective != bmtest::brute_force_lap(c);
  }
  const double eps = 1e-4;
  for (int t = 0; t < 200; ++t) {
    const std::size_t n = 1 + rng.below(50);
    const Matrix c = bmtest::uniform_matrix(n, n, rng);
    const double gap = solve_lap_auction(c, eps).objective - solve_lap_jv(c).objective;
    auction_wrong += gap > static_cast<double>(n) * eps || gap < -1e-12;
  }
  return {jv_wrong == 0 && auction_wrong == 0,
          fmt("JV mismatches %d/200, auction outside N*eps %d/200", jv_wrong, auction_wrong)};
}

Outcome unsupervised_pipeline() {
  int runs = 0, imperfect = 0, oracle_worse = 0;
  for (int classes : {4, 6, 8}) {
    for (double spread : {0.01, 0.03}) {
      ExperimentConfig cfg;
      cfg.kind = ExperimentKind::kUnsupClassify;
      cfg.synthetic = SyntheticSource{};
      cfg.synthetic->kind = SyntheticSource::Kind::kBlobs;
      cfg.synthetic->blobs.classes = classes;
      cfg.synthetic->blobs.spread = spread;
      cfg.seeds = {0, 1, 2};
      cfg.kmeans_init = 20;
      for (const auto& row : run_unsupervised_classifier(cfg).rows) {
        ++runs;
        imperfect += row.blind_accuracy != 1.0;
        oracle_worse += row.oracle_accuracy < row.blind_accuracy;
      }
    }
  }
  return {runs > 0 && imperfect == 0 && oracle_worse == 0,
          fmt("%d runs, blind < 1 on %d, oracle below blind on %d", runs, imperfect, oracle_worse)};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"dual soundness", dual_soundness},
      {"global optimality at N=10", global_optimality},
      {"factorized and reference solvers agree", reference_equivalence},
      {"Gaussian ablation", gaussian_ablation},
      {"coupling scaling identity", transport_identity},
      {"shuffle monotonicity", shuffle_monotonicity},
      {"subset heuristic vs exact", subset_oracle},
      {"random baseline", random_baseline},
      {"LAP layer", lap_layer},
      {"unsupervised classifier", unsupervised_pipeline},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    failures += !o.pass;
    std::printf("%s %2zu %s: %s (%.1fs)\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first, o.detail.c_str(),
                secs);
    std::fflush(stdout);
  }
  return failures;
}
