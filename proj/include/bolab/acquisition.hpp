#pragma once

#include <memory>
#include <variant>

#include "bolab/surrogate_gp.hpp"

namespace bolab::acq {

using Vec = gp::Vec;

struct FixedKappa {
  double kappa = 2.0;
};

/// sqrt(2 ln(M t^2 pi^2 / (6 delta))), multiplied by `scale`.
struct ScheduleS {
  double M = 1e6;
  double delta = 0.1;
  double scale = 0.44721359549995793928;  // 1/sqrt(5)
};

/// sqrt(0.2 D ln(2t)).
struct ScheduleK {
  int dims = 2;
};

using KappaPolicy = std::variant<FixedKappa, ScheduleS, ScheduleK>;

/// Throws bolab::Error when the policy parameters are out of range.
void validate(const KappaPolicy& policy);

/// Exploration weight at outer iteration t (1-based). Natural logarithms.
double kappa_at(const KappaPolicy& policy, int t);

/// LCB = mean - kappa * std, minimized over the scaled box.
class AcquisitionContext {
 public:
  AcquisitionContext(std::shared_ptr<const gp::GpModel> model, KappaPolicy policy, int t);

  const gp::GpModel& model() const { return *model_; }
  std::shared_ptr<const gp::GpModel> model_ptr() const { return model_; }
  const KappaPolicy& policy() const { return policy_; }
  int iteration() const { return t_; }
  double kappa() const { return kappa_; }
  Eigen::Index dims() const { return model_->dims(); }

  double value(const Vec& x) const;
  /// Value, writing the gradient into `grad`.
  double value_grad(const Vec& x, Vec& grad) const;

 private:
  std::shared_ptr<const gp::GpModel> model_;
  KappaPolicy policy_;
  int t_;
  double kappa_;
};

struct LcbValueGrad {
  double value;
  Vec gradient;
};

LcbValueGrad lcb_value_grad(const AcquisitionContext& ctx, const Vec& x);

}  // namespace bolab::acq
