#include "treesim/crp.hpp"

#include <algorithm>
#include <numeric>

#include "treesim/errors.hpp"

namespace treesim {

CrpState crp_init(const AlphaTheta& params) {
  params.validate();
  if (!(params.theta > 0.0)) throw domain_error("crp: theta must be > 0");
  CrpState s;
  s.params = params;
  return s;
}

std::vector<int> CrpState::least_label_order() const {
  std::vector<int> order(tables_ltr.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [this](int a, int b) { return least_label_ltr[a] < least_label_ltr[b]; });
  return order;
}

void crp_seat(CrpState& state, RngStream& rng) {
  const double a = state.params.alpha, t = state.params.theta;
  const int label = state.n + 1;
  const int k = static_cast<int>(state.tables_ltr.size());
  double r = rng.uniform() * (state.n + t);
  for (int i = 0; i < k; ++i) {
    r -= state.tables_ltr[i] - a;
    if (r <= 0.0) {
      ++state.tables_ltr[i];
      state.customers_ltr[i].push_back(label);
      ++state.n;
      return;
    }
  }
  // new table: k gaps (left of the first table / between tables) at weight a each,
  // plus the rightmost slot at weight t
  int pos = k;  // rightmost by default
  r = rng.uniform() * (k * a + t);
  for (int g = 0; g < k; ++g) {
    r -= a;
    if (r <= 0.0) {
      pos = g;
      break;
    }
  }
  state.tables_ltr.insert(state.tables_ltr.begin() + pos, 1);
  state.least_label_ltr.insert(state.least_label_ltr.begin() + pos, label);
  state.customers_ltr.insert(state.customers_ltr.begin() + pos, {label});
  ++state.n;
}

std::vector<int> composition(const CrpState& state) { return state.tables_ltr; }

std::vector<double> limiting_frequencies(const CrpState& state) {
  if (state.n < 1) throw domain_error("limiting_frequencies: empty state");
  std::vector<double> freqs;
  freqs.reserve(state.tables_ltr.size());
  for (int pos : state.least_label_order())
    freqs.push_back(double(state.tables_ltr[pos]) / state.n);
  return freqs;
}

std::vector<int> classical_crp(const AlphaTheta& params, int n, RngStream& rng) {
  params.validate();
  const double a = params.alpha, t = params.theta;
  std::vector<int> tables;
  for (int c = 0; c < n; ++c) {
    double r = rng.uniform() * (c + t);
    bool seated = false;
    for (auto& occ : tables) {
      r -= occ - a;
      if (r <= 0.0) {
        ++occ;
        seated = true;
        break;
      }
    }
    if (!seated) tables.push_back(1);
  }
  return tables;
}

}  // namespace treesim
