#include "airtwin/bubble/bubble.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "airtwin/error.hpp"

namespace airtwin::bubble {

BubbleStyle bubble_visual(double ppm) {
  const double f = std::clamp((ppm - kLowPpm) / (kHighPpm - kLowPpm), 0.0, 1.0);
  // std::lerp is exact at both ends and monotone in f.
  return BubbleStyle{std::lerp(kGreenHueDeg, kRedHueDeg, f), std::lerp(kLowDiameterM, kHighDiameterM, f), 1.0};
}

double staleness_opacity(double age_s, const StalenessParams& params) {
  if (age_s <= 0.0) return 1.0;
  return std::max(params.floor, std::pow(0.5, age_s / params.half_life_s));
}

std::vector<int> update_bubbles(std::vector<Bubble>& bubbles, const Vec3& wearer_position,
                                const sensor::Reading& reading, double now, const StalenessParams& params) {
  std::vector<int> refreshed;
  const bool usable = reading.status == sensor::ReadingStatus::ok && reading.co2_ppm.has_value();
  for (auto& b : bubbles) {
    if (usable && distance(b.position, wearer_position) <= kProximityM) {
      b.last_ppm = *reading.co2_ppm;
      b.updated_t = now;
      b.style = bubble_visual(b.last_ppm);
      refreshed.push_back(b.id);
    } else {
      b.style.opacity = staleness_opacity(now - b.updated_t, params);
    }
  }
  return refreshed;
}

void fade_bubbles(std::vector<Bubble>& bubbles, double now, const StalenessParams& params) {
  for (auto& b : bubbles) b.style.opacity = staleness_opacity(now - b.updated_t, params);
}

std::vector<Bubble> merge_bubbles(std::span<const Bubble> bubbles, double merge_radius_m) {
  if (!(merge_radius_m > 0.0)) throw InvalidArgument("merge radius must be positive");

  struct Cluster {
    Bubble rep;
    Vec3 sum;
    double members = 1.0;
  };
  std::vector<Cluster> clusters;
  clusters.reserve(bubbles.size());
  for (const auto& b : bubbles) clusters.push_back({b, b.position, 1.0});
  std::sort(clusters.begin(), clusters.end(), [](const Cluster& a, const Cluster& b) { return a.rep.id < b.rep.id; });

  bool merged = true;
  while (merged) {
    merged = false;
    for (std::size_t a = 0; a < clusters.size() && !merged; ++a) {
      for (std::size_t b = a + 1; b < clusters.size(); ++b) {
        if (distance(clusters[a].rep.position, clusters[b].rep.position) > merge_radius_m) continue;
        Cluster& keep = clusters[a];
        const Cluster& gone = clusters[b];
        // Freshest reading wins; on a tie the lower id (keep) does.
        if (gone.rep.updated_t > keep.rep.updated_t) {
          keep.rep.last_ppm = gone.rep.last_ppm;
          keep.rep.updated_t = gone.rep.updated_t;
          keep.rep.style = gone.rep.style;
        }
        keep.rep.placed_t = std::min(keep.rep.placed_t, gone.rep.placed_t);
        keep.sum += gone.sum;
        keep.members += gone.members;
        keep.rep.position = keep.sum * (1.0 / keep.members);
        clusters.erase(clusters.begin() + static_cast<std::ptrdiff_t>(b));
        merged = true;
        break;
      }
    }
  }

  std::vector<Bubble> out;
  out.reserve(clusters.size());
  for (auto& c : clusters) out.push_back(c.rep);
  return out;
}

}  // namespace airtwin::bubble
