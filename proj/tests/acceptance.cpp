// Acceptance run: one PASS/FAIL line per criterion. Exit status is nonzero
// if any criterion fails.

#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "lagfree/lagfree.hpp"

using namespace lagfree;

namespace {

constexpr double kPi = std::numbers::pi;

struct Outcome {
  bool pass = true;
  std::string detail;

  void check(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail += (detail.empty() ? "" : "; ") + std::string("failed: ") + what;
    }
  }
  void note(const std::string& what) { detail += (detail.empty() ? "" : "; ") + what; }
};

std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2e", v);
  return buf;
}

std::string fixed(double v, int digits = 2) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

Eigen::Matrix2cd random_unitary(std::mt19937_64& rng) {
  std::normal_distribution<double> N(0.0, 1.0);
  Eigen::Matrix2cd A;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) A(i, j) = {N(rng), N(rng)};
  Eigen::HouseholderQR<Eigen::Matrix2cd> qr(A);
  return qr.householderQ();
}

const std::vector<std::pair<int, int>> kFineLevels{{24, 96}, {48, 192}, {96, 384}};

// 1. Schoen-Wolfson cones.
Outcome sw_verification() {
  Outcome out;
  const Domain ball = unit_ball();
  const auto fs = ball_test_batch();
  out.check(fs.size() >= 20, "fewer than 20 Hamiltonians");
  for (auto [p, q] : std::vector<std::pair<int, int>>{{1, 2}, {2, 3}, {3, 4}}) {
    const auto t0 = std::chrono::steady_clock::now();
    const ExampleMap e = sw_cone(p, q);
    const std::string tag = e.name + " ";
    std::vector<double> h, structural, angle_div, angle_perp, stationarity;
    double geometry = 0.0, angle_err = 0.0;
    ResidualReport finest;
    for (auto [R, S] : kFineLevels) {
      const MeshPtr m = build_polar_mesh(R, S, 1.0);
      const ResidualReport exact = exact_report(e, m, ball, fs);
      const ResidualReport p1 = discrete_report(e, m, ball, fs);
      geometry = std::max({geometry, exact.lagrangian, exact.conformality});
      for (const Point2& x : m->nodes()) {
        if (x.norm() < 1e-14) continue;
        const cplx expected = std::polar(1.0, (p - q) * std::atan2(x.y(), x.x()));
        angle_err = std::max(angle_err, std::abs(lagrangian_angle(e.frame(x)).angle.value() - expected));
      }
      h.push_back(m->h());
      structural.push_back(p1.structural);
      angle_div.push_back(p1.angle_div);
      angle_perp.push_back(p1.angle_perp_div);
      stationarity.push_back(p1.stationarity);
      finest = exact;
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const OrderFit fs_order = estimate_order(h, structural);
    const OrderFit fa = estimate_order(h, angle_div);
    const OrderFit fp = estimate_order(h, angle_perp);
    const OrderFit fst = estimate_order(h, stationarity);
    out.check(geometry <= 1e-12, tag + "lagrangian/conformality " + sci(geometry));
    out.check(angle_err <= 1e-12, tag + "angle error " + sci(angle_err));
    out.check(finest.legendrian <= 1e-12, tag + "legendrian " + sci(finest.legendrian));
    out.check(finest.conormal <= 1e-12, tag + "conormal " + sci(finest.conormal));
    out.check(finest.neumann_trace <= 1e-8, tag + "neumann_trace " + sci(finest.neumann_trace));
    out.check(fs_order.passes(1.0), tag + "structural order " + fixed(fs_order.order));
    out.check(fa.passes(1.0) && fp.passes(1.0), tag + "angle harmonicity order");
    out.check(fst.passes(0.8), tag + "stationarity order " + fixed(fst.order));
    out.check(secs <= 120.0, tag + "runtime " + fixed(secs, 1) + " s");
    out.note(tag + "geom " + sci(geometry) + " leg " + sci(finest.legendrian) + " neu " + sci(finest.neumann_trace) +
             " struct order " + (fs_order.at_floor ? std::string("floor") : fixed(fs_order.order)) + " angle " +
             (fa.at_floor && fp.at_floor ? std::string("floor") : fixed(std::min(fa.order, fp.order))) +
             " stat order " + fixed(fst.order) + " " + fixed(secs, 1) + " s");
  }
  return out;
}

// 2. Flat discs under random unitaries.
Outcome flat_null_test() {
  Outcome out;
  std::mt19937_64 rng(2024);
  const Domain ball = unit_ball();
  const auto fs = ball_test_batch();
  const MeshPtr m = build_polar_mesh(96, 384, 1.0);
  double worst = 0.0;
  std::string worst_key;
  for (int k = 0; k < 5; ++k) {
    const ResidualReport r = exact_report(flat_disc(random_unitary(rng)), m, ball, fs);
    for (const auto& [key, v] : r.entries()) {
      if (v > worst) {
        worst = v;
        worst_key = key;
      }
    }
  }
  out.check(worst <= 1e-10, "largest entry " + worst_key + " " + sci(worst));
  out.note("largest entry over 5 unitaries: " + worst_key + " " + sci(worst));
  return out;
}

// 3. The nonminimal map on its own boundary curve.
Outcome nonminimal_discrimination() {
  Outcome out;
  const ExampleMap e = nonminimal_map();
  const Domain d = curve_domain_from_map(e);
  const auto fs = default_test_batch(e, d);
  std::vector<double> h, v;
  double variance = 0.0;
  for (auto [R, S] : std::vector<std::pair<int, int>>{{12, 48}, {24, 96}, {48, 192}}) {
    const MeshPtr m = build_polar_mesh(R, S, 1.0);
    DiscreteMap u = sample(e, m);
    u.exact_frames.reset();
    v.push_back(stationarity_test(u, d, fs));
    h.push_back(m->h());
    variance = angle_variance(u);
  }
  const OrderFit fit = estimate_order(h, v);
  const BoundaryResiduals b = boundary_conditions_report(e, *build_polar_mesh(48, 192, 1.0), d);
  out.check(fit.passes(1.0), "stationarity order " + fixed(fit.order));
  out.check(variance >= 0.1, "angle variance " + fixed(variance, 3));
  out.check(b.legendrian >= 0.5, "legendrian " + fixed(b.legendrian, 3));
  out.check(b.neumann_trace >= 1.0, "neumann_trace " + fixed(b.neumann_trace, 3));
  out.note("stationarity " + sci(v.front()) + " -> " + sci(v.back()) + " order " + fixed(fit.order) +
           ", angle variance " + fixed(variance, 3) + ", legendrian " + fixed(b.legendrian, 4) + ", neumann_trace " +
           fixed(b.neumann_trace, 4));
  return out;
}

// 4. Degrees of the cone singularities.
Outcome degree_extraction() {
  Outcome out;
  std::vector<double> degrees;
  for (auto [p, q] : std::vector<std::pair<int, int>>{{1, 2}, {2, 3}}) {
    const ExampleMap e = sw_cone(p, q);
    const SingularMassRecord rec = singular_masses(e.angle_flux, Point2::Zero(), {0.1, 0.25, 0.5, 0.9});
    degrees.push_back(rec.degree);
    out.check(std::abs(std::abs(rec.degree) - 1.0) <= 1e-8, e.name + " |degree| " + sci(std::abs(rec.degree)));
    // The sign is p - q: the circulation of the angle flux is 2 pi (p - q).
    out.check(std::abs(rec.degree - (p - q)) <= 1e-8, e.name + " degree sign");
    out.check(rec.degree_spread <= 1e-8, e.name + " radius spread " + sci(rec.degree_spread));
    out.check(std::abs(rec.flux_mass) <= 1e-8, e.name + " flux mass " + sci(rec.flux_mass));
  }
  out.check(std::abs(degrees[0] - degrees[1]) <= 1e-8, "degrees differ");
  out.note("degrees " + fixed(degrees[0], 12) + ", " + fixed(degrees[1], 12));
  return out;
}

// 5. Hopf-invariant flows preserve the Lagrangian condition. For the
// quadratic generators one RK2 step is a complex-linear map M with M*M a
// real multiple of the identity, so the flat disc stays exactly Lagrangian.
// The per-step drift order is measured with a non-constant radial profile,
// where the integrator error shows.
Outcome flow_invariance() {
  Outcome out;
  const Domain ball = unit_ball();
  const MeshPtr m = build_polar_mesh(24, 96, 1.0);
  const DiscreteMap flat = sample(flat_disc(Eigen::Matrix2cd::Identity()), m);
  const std::vector<double> dts{1e-2, 5e-3, 2.5e-3};
  for (int c = 0; c < 4; ++c) {
    std::array<double, 4> coef{0, 0, 0, 0};
    coef[c] = 1.0;
    const Hamiltonian f = hopf_invariant_quadratic(coef, Profile::constant(1.0));
    FlowState s = make_flow_state(flat, ball);
    double bnd = 0.0;
    for (int k = 0; k < 100; ++k) {
      s = hamiltonian_flow_step(s, f, 1e-2, ball);
      bnd = std::max(bnd, s.diagnostics.boundary_violation);
    }
    const Hamiltonian g = hopf_invariant_quadratic(coef, Profile::quadratic(1.0, 0.2, 0.0));
    std::vector<double> drift;
    const FlowState s0 = make_flow_state(flat, ball);
    for (double dt : dts) drift.push_back(hamiltonian_flow_step(s0, g, dt, ball).diagnostics.lagrangian);
    const OrderFit fit = estimate_order(dts, drift);
    const std::string tag = "c=e" + std::to_string(c + 1) + " ";
    out.check(s.diagnostics.lagrangian <= 1e-6, tag + "lagrangian after 100 steps " + sci(s.diagnostics.lagrangian));
    out.check(bnd <= 1e-12, tag + "boundary violation " + sci(bnd));
    out.check(fit.passes(2.5), tag + "drift order " + fixed(fit.order));
    out.note(tag + "lag " + sci(s.diagnostics.lagrangian) + " drift " + sci(drift.front()) + " order " +
             (fit.at_floor ? std::string("floor") : fixed(fit.order)));
  }
  return out;
}

// 6. Rigidity of the flat equatorial disc.
Outcome rigidity() {
  Outcome out;
  const MeshPtr m = build_polar_mesh(48, 192, 1.0);
  const SolverConfig cfg;
  for (unsigned seed = 1; seed <= 5; ++seed) {
    const auto t0 = std::chrono::steady_clock::now();
    const RigidityReport r = rigidity_experiment(seed, 0.05, m, cfg);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const std::string tag = "seed " + std::to_string(seed) + " ";
    out.check(r.pass, tag + "dist " + sci(r.distance) + " var " + sci(r.angle_variance) + " circle " +
                          sci(r.circle_defect));
    out.check(secs <= 300.0, tag + "runtime " + fixed(secs, 1) + " s");
    out.note(tag + sci(r.initial_distance) + " -> " + sci(r.distance) + " (" + fixed(secs, 1) + " s)");
  }
  return out;
}

// 7. The angle identity d_theta u / r = -conj(g) J d_r u.
Outcome convention_identity() {
  Outcome out;
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  std::vector<ExampleMap> examples{sw_cone(1, 2), sw_cone(2, 3), sw_cone(3, 4), nonminimal_map()};
  for (int k = 0; k < 3; ++k) examples.push_back(flat_disc(random_unitary(rng)));
  double worst = 0.0;
  for (const ExampleMap& e : examples) {
    for (int i = 0; i < 1000; ++i) {
      const double r = std::max(0.01, std::sqrt(U(rng)));
      const double th = 2.0 * kPi * U(rng);
      const TangentFrame f = e.polar_frame(r, th);
      const cplx gbar = e.angle(Point2(r * std::cos(th), r * std::sin(th))).value();
      const AmbientVector rhs = -1.0 * (gbar * apply_J(f.e_x));
      worst = std::max(worst, norm(f.e_y - rhs) / std::max(norm(f.e_y), 1e-300));
    }
  }
  out.check(worst <= 1e-12, "relative error " + sci(worst));
  out.note("max relative error " + sci(worst) + " over " + std::to_string(examples.size()) + " examples");
  return out;
}

// 8. The stationarity test flags a non-Hamiltonian perturbation.
Outcome sensitivity() {
  Outcome out;
  const Domain ball = unit_ball();
  const Point2 c(0.5, 0.0);
  const double rf = 0.16, d = rf + 0.02;
  const double half_angle = std::asin(d / 0.5) + 0.01;
  const OmegaSpec omega = OmegaSpec::annular_sector(0.5 - d, 0.5 + d, -half_angle, half_angle);
  const Hamiltonian f = interior_bump({0.5, 0.0, 0.0, 0.0}, rf, 1.0);
  const MeshPtr m = build_polar_mesh(48, 192, 1.0);
  const double flagged = stationarity_test(normal_dipole_perturbation(m, c, 1.3 * rf, 0.05), ball, {f}, omega);
  const double control = stationarity_test(normal_dipole_perturbation(m, c, 1.3 * rf, 0.0), ball, {f}, omega);
  out.check(flagged >= 1e-2, "perturbed value " + sci(flagged));
  out.note("perturbed " + sci(flagged) + ", unperturbed " + sci(control));
  return out;
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"Schoen-Wolfson verification", sw_verification},
      {"flat-disc null test", flat_null_test},
      {"nonminimal discriminating test", nonminimal_discrimination},
      {"degree extraction", degree_extraction},
      {"Hamiltonian flow invariance", flow_invariance},
      {"rigidity of the flat disc", rigidity},
      {"angle convention identity", convention_identity},
      {"stationarity test sensitivity", sensitivity},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("error: ") + e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    failed += o.pass ? 0 : 1;
    std::printf("%s %zu %s [%.1f s]: %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(), secs,
                o.detail.c_str());
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
