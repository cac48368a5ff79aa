#include "stmg/lagrange.hpp"

#include <stdexcept>

namespace stmg {

LagrangeBasis::LagrangeBasis(std::vector<double> nodes) : nodes_(std::move(nodes)) {
  if (nodes_.empty())
    throw std::invalid_argument("LagrangeBasis: empty node set");
  for (std::size_t i = 1; i < nodes_.size(); ++i)
    if (nodes_[i] <= nodes_[i - 1])
      throw std::invalid_argument("LagrangeBasis: nodes must be strictly increasing");
}

void LagrangeBasis::check_index(int i) const {
  if (i < 0 || i >= size())
    throw std::invalid_argument("LagrangeBasis: index out of range");
}

double LagrangeBasis::eval(int i, double t) const {
  check_index(i);
  double v = 1.0;
  for (int j = 0; j < size(); ++j)
    if (j != i)
      v *= (t - nodes_[j]) / (nodes_[i] - nodes_[j]);
  return v;
}

double LagrangeBasis::deriv(int i, double t) const {
  check_index(i);
  double sum = 0.0;
  for (int m = 0; m < size(); ++m) {
    if (m == i)
      continue;
    double term = 1.0 / (nodes_[i] - nodes_[m]);
    for (int j = 0; j < size(); ++j)
      if (j != i && j != m)
        term *= (t - nodes_[j]) / (nodes_[i] - nodes_[j]);
    sum += term;
  }
  return sum;
}

} // namespace stmg
