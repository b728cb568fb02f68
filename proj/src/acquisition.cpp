#include "bolab/acquisition.hpp"

#include <cmath>

#include "bolab/errors.hpp"

namespace bolab::acq {

void validate(const KappaPolicy& policy) {
  std::visit(
      [](const auto& p) {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, FixedKappa>) {
          if (!(p.kappa >= 0.0)) throw Error("kappa must be >= 0");
        } else if constexpr (std::is_same_v<T, ScheduleS>) {
          if (!(p.M >= 1.0)) throw Error("schedule-s: M must be >= 1");
          if (!(p.delta > 0.0 && p.delta < 1.0)) throw Error("schedule-s: delta must be in (0,1)");
          if (!(p.scale > 0.0)) throw Error("schedule-s: scale must be > 0");
        } else {
          if (p.dims < 1) throw Error("schedule-k: D must be >= 1");
        }
      },
      policy);
}

double kappa_at(const KappaPolicy& policy, int t) {
  if (t < 1) throw Error("kappa_at: iteration index must be >= 1");
  const double td = static_cast<double>(t);
  return std::visit(
      [td](const auto& p) -> double {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, FixedKappa>) {
          return p.kappa;
        } else if constexpr (std::is_same_v<T, ScheduleS>) {
          return p.scale * std::sqrt(2.0 * std::log(p.M * td * td * M_PI * M_PI / (6.0 * p.delta)));
        } else {
          return std::sqrt(0.2 * p.dims * std::log(2.0 * td));
        }
      },
      policy);
}

AcquisitionContext::AcquisitionContext(std::shared_ptr<const gp::GpModel> model,
                                       KappaPolicy policy, int t)
    : model_(std::move(model)), policy_(policy), t_(t), kappa_(kappa_at(policy, t)) {
  if (!model_) throw Error("acquisition: null model");
}

double AcquisitionContext::value(const Vec& x) const {
  const auto [mean, std] = model_->mean_std(x);
  return mean - kappa_ * std;
}

double AcquisitionContext::value_grad(const Vec& x, Vec& grad) const {
  const gp::Posterior p = model_->posterior(x);
  grad = p.grad_mean - kappa_ * p.grad_std;
  return p.mean - kappa_ * p.std;
}

LcbValueGrad lcb_value_grad(const AcquisitionContext& ctx, const Vec& x) {
  LcbValueGrad out;
  out.value = ctx.value_grad(x, out.gradient);
  return out;
}

}  // namespace bolab::acq
