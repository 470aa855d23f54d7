#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <utility>
#include <vector>

#include "scnn/error.hpp"
#include "scnn/network.hpp"
#include "scnn/rng.hpp"
#include "scnn/tensor.hpp"

namespace scnn {

struct GradientReport {
  double max_relative_error = 0.0;
  double epsilon = 0.0;
  std::size_t coordinates_checked = 0;
};

inline double gradient_relative_error(double analytic, double numeric) {
  const double denom = std::max({std::fabs(analytic), std::fabs(numeric), 1e-8});
  return std::fabs(analytic - numeric) / denom;
}

// Central-difference verification of Network::loss_and_gradients over a
// sampled subset of coordinates (all of them when the network is small).
// include_input additionally checks gradients w.r.t. the embedded input,
// standing in for the non-static embedding channel.
inline GradientReport gradient_check(Network& net, const Tensor& input, std::size_t gold,
                                     double epsilon, std::size_t sample_target = 200,
                                     std::uint64_t seed = 1,
                                     const Tensor* static_features = nullptr,
                                     bool include_input = true) {
  if (epsilon <= 0.0) throw ConfigError("gradient check epsilon must be > 0");

  Gradients grads;
  net.loss_and_gradients(input, gold, grads, static_features);
  std::vector<Tensor*> params = net.parameters();

  // Coordinate space: each parameter tensor, then (optionally) the input.
  struct Coord {
    std::size_t tensor;  // params.size() means "input"
    std::size_t offset;
  };
  std::vector<std::size_t> sizes;
  for (const Tensor* p : params) sizes.push_back(p->size());
  if (include_input) sizes.push_back(input.size());
  std::size_t total = 0;
  for (std::size_t s : sizes) total += s;

  std::vector<Coord> coords;
  if (total <= sample_target) {
    for (std::size_t t = 0; t < sizes.size(); ++t) {
      for (std::size_t off = 0; off < sizes[t]; ++off) coords.push_back({t, off});
    }
  } else {
    Rng rng(seed);
    std::vector<std::size_t> picked;
    while (picked.size() < sample_target) {
      std::size_t flat = static_cast<std::size_t>(rng.below(total));
      if (std::find(picked.begin(), picked.end(), flat) == picked.end()) picked.push_back(flat);
    }
    std::sort(picked.begin(), picked.end());
    for (std::size_t flat : picked) {
      std::size_t t = 0;
      while (flat >= sizes[t]) flat -= sizes[t++];
      coords.push_back({t, flat});
    }
  }

  Tensor probe_input = input;
  GradientReport report;
  report.epsilon = epsilon;
  for (const Coord& c : coords) {
    double* cell;
    double analytic;
    if (include_input && c.tensor == params.size()) {
      cell = &probe_input[c.offset];
      analytic = grads.input[c.offset];
    } else {
      cell = &(*params[c.tensor])[c.offset];
      analytic = grads.params[c.tensor][c.offset];
    }
    const double saved = *cell;
    *cell = saved + epsilon;
    const double loss_plus = net.probabilities(probe_input, gold, static_features).second;
    *cell = saved - epsilon;
    const double loss_minus = net.probabilities(probe_input, gold, static_features).second;
    *cell = saved;
    const double numeric = (loss_plus - loss_minus) / (2.0 * epsilon);
    report.max_relative_error =
        std::max(report.max_relative_error, gradient_relative_error(analytic, numeric));
    ++report.coordinates_checked;
  }
  return report;
}

}  // namespace scnn
