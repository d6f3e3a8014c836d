#include "odesys/encoding.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "odesys/errors.hpp"

namespace odesys {

std::vector<double> grid_points(double lo, double hi, double step) {
  if (!(step > 0.0)) throw ValidationError("grid step must be positive");
  if (!(lo <= hi)) throw ValidationError("grid bounds out of order");
  std::vector<double> pts;
  const double stop = hi - 1e-9 * step;
  for (long long k = 0;; ++k) {
    const double v = lo + static_cast<double>(k) * step;
    if (!(v < stop)) break;
    pts.push_back(v);
  }
  if (pts.empty() || pts.back() != hi) pts.push_back(hi);
  return pts;
}

std::size_t nearest_grid_index(std::span<const double> grid, double value) {
  auto it = std::lower_bound(grid.begin(), grid.end(), value);
  if (it == grid.begin()) return 0;
  if (it == grid.end()) return grid.size() - 1;
  const auto hi = static_cast<std::size_t>(it - grid.begin());
  const std::size_t lo = hi - 1;
  return (value - grid[lo]) <= (grid[hi] - value) ? lo : hi;
}

MixedEncoding::MixedEncoding(std::vector<GeneSpec> genes) : genes_(std::move(genes)) {
  grids_.resize(genes_.size());
  for (std::size_t i = 0; i < genes_.size(); ++i) {
    const auto& g = genes_[i];
    if (!(g.lower <= g.upper)) {
      throw ValidationError("gene '" + g.name + "' has lower > upper");
    }
    if (g.kind == GeneKind::real && g.step > 0.0) {
      grids_[i] = grid_points(g.lower, g.upper, g.step);
    }
  }
}

double MixedEncoding::snap_gene(std::size_t i, double value) const {
  const auto& g = genes_[i];
  double v = std::clamp(value, g.lower, g.upper);
  if (g.kind == GeneKind::integer) {
    v = std::clamp(std::round(v), std::ceil(g.lower), std::floor(g.upper));
  } else if (!grids_[i].empty()) {
    v = grids_[i][nearest_grid_index(grids_[i], v)];
  }
  return v;
}

DecisionVector MixedEncoding::snap(std::span<const double> genome) const {
  if (genome.size() != genes_.size()) {
    throw SchemaError("genome length does not match encoding");
  }
  DecisionVector x(genome.size());
  for (std::size_t i = 0; i < genome.size(); ++i) x[i] = snap_gene(i, genome[i]);
  return x;
}

RandomKeyVector::RandomKeyVector(std::vector<double> keys) : keys_(std::move(keys)) {
  for (std::size_t i = 0; i < keys_.size(); ++i) {
    if (!(keys_[i] >= 0.0 && keys_[i] < 1.0)) {
      std::ostringstream msg;
      msg << "random key " << i << " = " << keys_[i] << " outside [0, 1)";
      throw DomainError(msg.str());
    }
  }
}

DecisionVector decode(const RandomKeyVector& keys, const RandomKeyDecoder& decoder) {
  if (keys.size() != decoder.key_count()) {
    std::ostringstream msg;
    msg << "decoder expects " << decoder.key_count() << " keys, got " << keys.size();
    throw SchemaError(msg.str());
  }
  return decoder.decode(keys.keys());
}

}  // namespace odesys
