#pragma once

#include <array>
#include <concepts>
#include <cmath>
#include <cstdint>
#include <span>

namespace gradsync {

/// Philox4x32-10 (Salmon et al., SC'11). Stateless: the output block is a pure
/// function of (key, counter).
struct Philox4x32 {
  using Block = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static Block generate(Block counter, Key key) {
    for (int round = 0; round < 10; ++round) {
      counter = single_round(counter, key);
      key[0] += 0x9E3779B9u;
      key[1] += 0xBB67AE85u;
    }
    return counter;
  }

 private:
  static Block single_round(const Block& c, const Key& k) {
    const std::uint64_t p0 = std::uint64_t{0xD2511F53u} * c[0];
    const std::uint64_t p1 = std::uint64_t{0xCD9E8D57u} * c[2];
    const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
    const auto lo0 = static_cast<std::uint32_t>(p0);
    const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
    const auto lo1 = static_cast<std::uint32_t>(p1);
    return {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
  }
};

/// Fills `out` with standard normal variates that are a pure function of
/// (seed, stream, index). Four variates per Philox block; dimensions beyond
/// four draw further blocks under a perturbed key.
void standard_normals(std::uint64_t seed, std::uint64_t stream, std::int64_t index,
                      std::span<double> out);

/// Brownian increments dW_k ~ N(0, dt I_d), indexed by step k (which may be
/// negative: steps before time zero serve pullback runs). Random access and
/// sequential access agree bit-for-bit.
class NoisePath {
 public:
  NoisePath(std::uint64_t master_seed, std::uint64_t stream_id, double dt, int dim);

  std::uint64_t master_seed() const { return seed_; }
  std::uint64_t stream_id() const { return stream_; }
  double dt() const { return dt_; }
  int dim() const { return dim_; }

  void increment_at(std::int64_t k, std::span<double> out) const;

  /// Returns the increment at the cursor and advances it.
  void next_increment(std::span<double> out) { increment_at(cursor_++, out); }

  std::int64_t cursor() const { return cursor_; }
  void seek(std::int64_t k) { cursor_ = k; }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_;
  double dt_;
  double sqrt_dt_;
  int dim_;
  std::int64_t cursor_ = 0;
};

/// Discrete shift: increment k of the view is increment k + shift of the base.
/// Holds a reference; the base must outlive the view.
class ShiftView {
 public:
  ShiftView(const NoisePath& base, std::int64_t shift_steps) : base_(&base), shift_(shift_steps) {}

  double dt() const { return base_->dt(); }
  int dim() const { return base_->dim(); }
  std::int64_t shift() const { return shift_; }
  const NoisePath& base() const { return *base_; }

  void increment_at(std::int64_t k, std::span<double> out) const {
    base_->increment_at(k + shift_, out);
  }
  void next_increment(std::span<double> out) { increment_at(cursor_++, out); }
  std::int64_t cursor() const { return cursor_; }
  void seek(std::int64_t k) { cursor_ = k; }

  ShiftView shifted(std::int64_t more) const { return ShiftView(*base_, shift_ + more); }

 private:
  const NoisePath* base_;
  std::int64_t shift_;
  std::int64_t cursor_ = 0;
};

/// Accelerated-clock view W~_t = sqrt(eps) W_{t/eps}. One base step of length
/// dt is one view step of length eps*dt, and the view increment is sqrt(eps)
/// times the base increment, so both clocks consume the same random numbers.
class ScaledView {
 public:
  ScaledView(const NoisePath& base, double eps);

  double dt() const { return eps_ * base_->dt(); }
  int dim() const { return base_->dim(); }
  double eps() const { return eps_; }

  void increment_at(std::int64_t k, std::span<double> out) const {
    base_->increment_at(k, out);
    for (int i = 0; i < dim(); ++i) out[i] *= sqrt_eps_;
  }
  void next_increment(std::span<double> out) { increment_at(cursor_++, out); }
  std::int64_t cursor() const { return cursor_; }
  void seek(std::int64_t k) { cursor_ = k; }

 private:
  const NoisePath* base_;
  double eps_;
  double sqrt_eps_;
  std::int64_t cursor_ = 0;
};

/// Convenience for scaled_view(path, eps) in the operation vocabulary.
inline ScaledView scaled_view(const NoisePath& path, double eps) { return ScaledView(path, eps); }

/// Anything steppers can draw increments from.
template <class N>
concept NoiseSource = requires(N n, const N cn, std::span<double> out) {
  { cn.dt() } -> std::convertible_to<double>;
  { cn.dim() } -> std::convertible_to<int>;
  n.next_increment(out);
};

/// Stream id for cell (group, replica): unique across a campaign.
constexpr std::uint64_t cell_stream(std::uint64_t group, std::uint64_t replica) {
  return (group << 32) | (replica & 0xFFFFFFFFull);
}

}  // namespace gradsync
