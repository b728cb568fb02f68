#include "bolab/search_box.hpp"

#include "bolab/errors.hpp"

namespace bolab {

SearchBox::SearchBox(Eigen::VectorXd lo, Eigen::VectorXd hi)
    : lower(std::move(lo)), upper(std::move(hi)) {
  if (lower.size() != upper.size() || lower.size() == 0)
    throw Error("search box: lower/upper dimension mismatch");
  if (!(lower.array() < upper.array()).all())
    throw Error("search box: lower must be < upper componentwise");
}

bool SearchBox::contains(const Eigen::VectorXd& x) const {
  return x.size() == lower.size() && (x.array() >= lower.array()).all() &&
         (x.array() <= upper.array()).all();
}

Eigen::VectorXd SearchBox::to_unit(const Eigen::VectorXd& raw) const {
  return ((raw - lower).array() / (upper - lower).array()).matrix();
}

Eigen::VectorXd SearchBox::from_unit(const Eigen::VectorXd& unit) const {
  Eigen::VectorXd raw = lower + (unit.array() * (upper - lower).array()).matrix();
  return raw.cwiseMax(lower).cwiseMin(upper);
}

}  // namespace bolab
