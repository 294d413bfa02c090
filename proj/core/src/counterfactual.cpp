#include "abl/counterfactual.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numbers>

namespace abl::counterfactual {

std::vector<std::string> DiscrepancyResult::skipped_subensembles() const {
  std::vector<std::string> out;
  for (const auto& s : subensembles) {
    if (!s.abl_conditional) out.push_back(s.post_outcome);
  }
  return out;
}

DiscrepancyResult counterfactual_discrepancy(const StateVector& pre, const Observable& post_measurement,
                                             const Observable& counterfactual, std::string_view outcome) {
  if (pre.dim() != post_measurement.dim()) {
    throw DimensionMismatch(pre.dim(), post_measurement.dim(), "counterfactual_discrepancy");
  }
  if (pre.dim() != counterfactual.dim()) {
    throw DimensionMismatch(pre.dim(), counterfactual.dim(), "counterfactual_discrepancy");
  }
  const std::size_t target = counterfactual.index_of(outcome);

  DiscrepancyResult result;
  result.counterfactual_outcome = std::string(outcome);
  result.qm_prediction = born_probability(pre, counterfactual.outcome(target).projector);

  for (const auto& b : post_measurement.outcomes()) {
    SubensembleReport sub;
    sub.post_outcome = b.label;
    sub.weight = born_probability(pre, b.projector);
    if (b.projector.rank() == 1) {
      const PrePostContext ctx(pre, b.projector.rank_one_state().with_label(b.label));
      result.special_case = result.special_case || is_special_case(ctx, counterfactual);
      if (sub.weight >= kNegligibleWeight) {
        sub.abl_conditional = abl_distribution(ctx, counterfactual);
        result.counterfactual_total += sub.weight * sub.abl_conditional->entries()[target].probability;
      }
    } else if (sub.weight >= kNegligibleWeight) {
      throw InvalidArgument("counterfactual_discrepancy: post outcome '" + b.label + "' has rank " +
                            std::to_string(b.projector.rank()) + "; subensembles need rank-1 post-selections");
    }
    result.subensembles.push_back(std::move(sub));
  }
  result.discrepancy = result.counterfactual_total - result.qm_prediction;
  return result;
}

DiscrepancyResult sharp_shanks(const BlochDirection& a, const BlochDirection& b, const BlochDirection& c) {
  return counterfactual_discrepancy(spin_state(a, true), spin_observable(b, "sigma_b"), spin_observable(c, "sigma_c"),
                                    "up");
}

namespace {

void finish_scan(ScanResult& scan) {
  for (std::size_t i = 0; i < scan.cells.size(); ++i) {
    const double d = std::abs(scan.cells[i].result.discrepancy);
    if (d > scan.max_abs_discrepancy) {
      scan.max_abs_discrepancy = d;
      scan.argmax = i;
    }
  }
}

void check_steps(std::size_t steps, std::size_t upper) {
  if (steps < kMinScanSteps || steps > upper) {
    throw InvalidArgument("grid steps " + std::to_string(steps) + " outside [" + std::to_string(kMinScanSteps) +
                          ", " + std::to_string(upper) + "]");
  }
}

}  // namespace

ScanResult discrepancy_scan(std::size_t grid_steps) {
  check_steps(grid_steps, kMaxScanSteps);
  const BlochDirection a(0.0, 0.0);
  ScanResult scan;
  scan.steps = grid_steps;
  scan.cells.reserve(grid_steps * grid_steps);
  const double step = std::numbers::pi / static_cast<double>(grid_steps);
  for (std::size_t ib = 0; ib < grid_steps; ++ib) {
    const BlochDirection b(static_cast<double>(ib) * step, 0.0);
    for (std::size_t ic = 0; ic < grid_steps; ++ic) {
      const BlochDirection c(static_cast<double>(ic) * step, 0.0);
      scan.cells.push_back({b, c, sharp_shanks(a, b, c)});
    }
  }
  finish_scan(scan);
  return scan;
}

ScanResult discrepancy_scan_sphere(std::size_t grid_steps) {
  check_steps(grid_steps, kMaxSphereScanSteps);
  const BlochDirection a(0.0, 0.0);
  ScanResult scan;
  scan.steps = grid_steps;
  scan.sphere = true;
  const double dtheta = std::numbers::pi / static_cast<double>(grid_steps);
  const double dphi = 2.0 * std::numbers::pi / static_cast<double>(grid_steps);
  std::vector<BlochDirection> directions;
  for (std::size_t it = 0; it < grid_steps; ++it) {
    for (std::size_t ip = 0; ip < grid_steps; ++ip) {
      directions.emplace_back(static_cast<double>(it) * dtheta, static_cast<double>(ip) * dphi);
    }
  }
  scan.cells.reserve(directions.size() * directions.size());
  for (const auto& b : directions) {
    for (const auto& c : directions) scan.cells.push_back({b, c, sharp_shanks(a, b, c)});
  }
  finish_scan(scan);
  return scan;
}

void write_scan_csv(std::ostream& os, const ScanResult& scan) {
  const auto flags = os.flags();
  const auto precision = os.precision();
  if (scan.sphere) {
    os << "theta_b,phi_b,theta_c,phi_c,counterfactual_total,qm_prediction,discrepancy,special_case\n";
  } else {
    os << "theta_b,theta_c,counterfactual_total,qm_prediction,discrepancy,special_case\n";
  }
  for (const auto& cell : scan.cells) {
    os << std::setprecision(12) << cell.b.theta() << ',';
    if (scan.sphere) os << cell.b.phi() << ',';
    os << cell.c.theta() << ',';
    if (scan.sphere) os << cell.c.phi() << ',';
    const auto& r = cell.result;
    os << std::setprecision(15) << r.counterfactual_total << ',' << r.qm_prediction << ',' << r.discrepancy << ','
       << (r.special_case ? "true" : "false") << '\n';
  }
  os.flags(flags);
  os.precision(precision);
}

CotenabilityVerdict cotenability(const PrePostContext& ctx, const Observable& q) {
  if (ctx.dim() != q.dim()) throw DimensionMismatch(ctx.dim(), q.dim(), "cotenability");
  for (const auto& o : q.outcomes()) {
    auto projected = apply_projector(o.projector, ctx.pre());
    if (projected.norm2 <= kNegligibleWeight) continue;
    const double survive = std::norm(inner_product(ctx.post(), projected.vector)) / projected.norm2;
    if (survive < 1.0 - kTolerance) return {false, o.label};
  }
  return {true, std::nullopt};
}

std::vector<WorldSet> build_world_sets(const PrePostContext& ctx, std::span<const Observable> observables) {
  std::vector<WorldSet> sets;
  sets.reserve(observables.size());
  for (const auto& q : observables) {
    if (q.dim() != ctx.dim()) throw DimensionMismatch(ctx.dim(), q.dim(), "build_world_sets");
    WorldSet set{q, true, {}};
    const auto joints = joint_weights(ctx, q);
    double total = 0.0;
    for (const double j : joints) total += j;
    set.defined = total >= kNegligibleWeight;

    for (std::size_t k = 0; k < q.size(); ++k) {
      const auto& o = q.outcome(k);
      World w;
      w.label = o.label;
      w.eigenvalue = o.eigenvalue;
      const auto projected = apply_projector(o.projector, ctx.pre());
      w.forward_weight = std::clamp(projected.norm2, 0.0, 1.0);
      if (projected.norm2 > kNegligibleWeight) {
        w.standard_post_conditional =
            std::clamp(std::norm(inner_product(ctx.post(), projected.vector)) / projected.norm2, 0.0, 1.0);
      } else if (o.projector.rank() == 1) {
        w.standard_post_conditional = born_probability(ctx.post(), o.projector);
      }
      w.joint = joints[k];
      if (set.defined) w.abl_conditional = std::clamp(joints[k] / total, 0.0, 1.0);
      w.unity_disagreement =
          w.standard_post_conditional && std::abs(*w.standard_post_conditional - 1.0) > kTolerance;
      set.worlds.push_back(std::move(w));
    }
    sets.push_back(std::move(set));
  }
  return sets;
}

ThreeBoxReport three_box() {
  const double r = 1.0 / std::sqrt(3.0);
  PrePostContext ctx(StateVector({r, r, r}, "psi"), StateVector({r, r, -r}, "phi"), PrePostContext::TimeLabels{"t_a", "t_b"});
  ThreeBoxReport report{ctx, {}};
  for (std::size_t box = 0; box < 2; ++box) {
    const std::size_t index[] = {box};
    const auto projector = Projector::basis(3, index);
    auto q = projector_observable(projector, "in box " + std::to_string(box + 1));
    auto dist = abl_distribution(ctx, q);
    const double forward = born_probability(ctx.pre(), projector);
    auto verdict = cotenability(ctx, q);
    report.boxes.push_back({std::move(q), std::move(dist), forward, std::move(verdict)});
  }
  return report;
}

}  // namespace abl::counterfactual
