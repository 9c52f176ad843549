#include "gradsync/noise.hpp"

#include <numbers>

#include "gradsync/error.hpp"

namespace gradsync {

namespace {

// Uniform on the open interval (0, 1).
inline double to_unit(std::uint32_t x) { return (static_cast<double>(x) + 0.5) * 0x1.0p-32; }

}  // namespace

void standard_normals(std::uint64_t seed, std::uint64_t stream, std::int64_t index,
                      std::span<double> out) {
  const auto k = static_cast<std::uint64_t>(index);
  const Philox4x32::Block counter{static_cast<std::uint32_t>(k), static_cast<std::uint32_t>(k >> 32),
                                  static_cast<std::uint32_t>(stream),
                                  static_cast<std::uint32_t>(stream >> 32)};
  std::size_t filled = 0;
  for (std::uint32_t block = 0; filled < out.size(); ++block) {
    const std::uint64_t kseed = seed ^ (std::uint64_t{block} * 0x9E3779B97F4A7C15ull);
    const Philox4x32::Key key{static_cast<std::uint32_t>(kseed), static_cast<std::uint32_t>(kseed >> 32)};
    const auto bits = Philox4x32::generate(counter, key);
    for (int pair = 0; pair < 2 && filled < out.size(); ++pair) {
      const double radius = std::sqrt(-2.0 * std::log(to_unit(bits[2 * pair])));
      const double angle = 2.0 * std::numbers::pi * to_unit(bits[2 * pair + 1]);
      out[filled++] = radius * std::cos(angle);
      if (filled < out.size()) out[filled++] = radius * std::sin(angle);
    }
  }
}

NoisePath::NoisePath(std::uint64_t master_seed, std::uint64_t stream_id, double dt, int dim)
    : seed_(master_seed), stream_(stream_id), dt_(dt), sqrt_dt_(std::sqrt(dt)), dim_(dim) {
  if (!(dt > 0.0)) throw PreconditionError("noise", "dt must be positive");
  if (dim < 1) throw PreconditionError("noise", "dimension must be >= 1");
}

void NoisePath::increment_at(std::int64_t k, std::span<double> out) const {
  standard_normals(seed_, stream_, k, out.first(static_cast<std::size_t>(dim_)));
  for (int i = 0; i < dim_; ++i) out[i] *= sqrt_dt_;
}

ScaledView::ScaledView(const NoisePath& base, double eps)
    : base_(&base), eps_(eps), sqrt_eps_(std::sqrt(eps)) {
  if (!(eps > 0.0)) throw PreconditionError("noise", "scaled_view requires eps > 0");
}

}  // namespace gradsync
