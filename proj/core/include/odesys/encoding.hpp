#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace odesys {

/// Flat numeric decision vector. Models document their own layout.
using DecisionVector = std::vector<double>;

enum class GeneKind { integer, real };

/// Points lo, lo + step, lo + 2 step, ... below hi, then hi itself.
/// A step at least as wide as the interval yields just the two endpoints.
std::vector<double> grid_points(double lo, double hi, double step);

/// Index of the grid point nearest to `value` (ties go to the lower point).
std::size_t nearest_grid_index(std::span<const double> grid, double value);

struct GeneSpec {
  std::string name;
  GeneKind kind = GeneKind::real;
  double lower = 0.0;
  double upper = 0.0;
  double step = 0.0;  ///< > 0 snaps a real gene onto grid_points(lower, upper, step)

  bool operator==(const GeneSpec&) const = default;
};

/// Direct encoding: the genome is the decision vector.
class MixedEncoding {
 public:
  MixedEncoding() = default;
  explicit MixedEncoding(std::vector<GeneSpec> genes);

  const std::vector<GeneSpec>& genes() const noexcept { return genes_; }
  std::size_t size() const noexcept { return genes_.size(); }

  /// Clamps to bounds, rounds integer genes and snaps stepped real genes.
  DecisionVector snap(std::span<const double> genome) const;
  double snap_gene(std::size_t i, double value) const;

 private:
  std::vector<GeneSpec> genes_;
  std::vector<std::vector<double>> grids_;  // per stepped gene, else empty
};

/// Key vector in [0, 1)^n.
class RandomKeyVector {
 public:
  explicit RandomKeyVector(std::vector<double> keys);
  std::span<const double> keys() const noexcept { return keys_; }
  std::size_t size() const noexcept { return keys_.size(); }

 private:
  std::vector<double> keys_;
};

/// Problem-specific map from random keys to decision vectors. Must be a
/// total, pure function of the keys.
class RandomKeyDecoder {
 public:
  virtual ~RandomKeyDecoder() = default;
  virtual std::size_t key_count() const = 0;
  virtual DecisionVector decode(std::span<const double> keys) const = 0;
};

/// Checks key length and range, then forwards to the decoder.
DecisionVector decode(const RandomKeyVector& keys, const RandomKeyDecoder& decoder);

struct RandomKeyEncoding {
  std::shared_ptr<const RandomKeyDecoder> decoder;
};

using Encoding = std::variant<MixedEncoding, RandomKeyEncoding>;

}  // namespace odesys
