#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <random>
#include <vector>

#include "liouville/errors.hpp"
#include "liouville/phase.hpp"

namespace liouville {

// Axis-aligned sampling box standing in for an open neighbourhood of an
// invariant manifold. Sampling is deterministic given the seed.
struct SampleRegion {
  std::array<double, 2> t_range{0.0, 1.0};
  std::vector<std::array<double, 2>> q_box;
  std::vector<std::array<double, 2>> p_box;
  int count = 200;
  std::uint64_t seed = 42;

  int dim() const { return static_cast<int>(q_box.size()); }

  void validate() const {
    if (count < 1) throw ConfigError("SampleRegion: count must be >= 1");
    if (q_box.empty() || q_box.size() != p_box.size())
      throw ConfigError("SampleRegion: q/p box count mismatch");
    if (!(t_range[0] <= t_range[1]))
      throw ConfigError("SampleRegion: empty t range");
    for (const auto& b : q_box)
      if (!(b[0] <= b[1])) throw ConfigError("SampleRegion: empty q range");
    for (const auto& b : p_box)
      if (!(b[0] <= b[1])) throw ConfigError("SampleRegion: empty p range");
  }

  static SampleRegion cube(int m, double t_lo, double t_hi, double q_half,
                           double p_half, int count = 200,
                           std::uint64_t seed = 42) {
    SampleRegion r;
    r.t_range = {t_lo, t_hi};
    r.q_box.assign(m, {-q_half, q_half});
    r.p_box.assign(m, {-p_half, p_half});
    r.count = count;
    r.seed = seed;
    return r;
  }
};

using PointFilter = std::function<bool(const PhasePoint&)>;

// Uniform draws over the region boxes, with optional rejection filtering.
// The double mapping is pinned (top 53 bits of the engine output) so runs
// are reproducible independent of the standard library's distributions.
class RegionSampler {
 public:
  explicit RegionSampler(const SampleRegion& region, PointFilter filter = {})
      : region_(region), filter_(std::move(filter)), rng_(region.seed) {
    region_.validate();
  }

  PhasePoint next() {
    for (int attempt = 0; attempt < 100000; ++attempt) {
      const int m = region_.dim();
      PhasePoint x;
      x.t = draw(region_.t_range);
      x.q.resize(m);
      x.p.resize(m);
      for (int k = 0; k < m; ++k) x.q[k] = draw(region_.q_box[k]);
      for (int k = 0; k < m; ++k) x.p[k] = draw(region_.p_box[k]);
      if (!filter_ || filter_(x)) return x;
    }
    throw Error("RegionSampler: filter rejected too many draws");
  }

  std::vector<PhasePoint> take(int n) {
    std::vector<PhasePoint> out;
    out.reserve(n);
    for (int i = 0; i < n; ++i) out.push_back(next());
    return out;
  }

 private:
  double unit() { return double(rng_() >> 11) * 0x1.0p-53; }
  double draw(const std::array<double, 2>& r) {
    return r[0] + (r[1] - r[0]) * unit();
  }

  SampleRegion region_;
  PointFilter filter_;
  std::mt19937_64 rng_;
};

}  // namespace liouville
