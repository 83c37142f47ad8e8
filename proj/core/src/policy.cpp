#include "tshc/policy.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace tshc {

bool MlpSpec::Valid() const {
  return layer_sizes.size() >= 2 &&
         std::all_of(layer_sizes.begin(), layer_sizes.end(),
                     [](int n) { return n > 0; });
}

std::size_t ParamCount(const MlpSpec& spec) {
  std::size_t count = 0;
  for (std::size_t l = 0; l + 1 < spec.layer_sizes.size(); ++l) {
    const auto n_in = static_cast<std::size_t>(spec.layer_sizes[l]);
    const auto n_out = static_cast<std::size_t>(spec.layer_sizes[l + 1]);
    count += n_in * n_out + n_out;
  }
  return count;
}

ParamVector InitParams(const MlpSpec& spec, Rng& rng, double stddev) {
  std::normal_distribution<double> normal(0.0, stddev);
  ParamVector theta(ParamCount(spec));
  for (double& w : theta) w = normal(rng);
  return theta;
}

ParamVector Perturb(std::span<const double> theta, double sigma, Rng& rng) {
  ParamVector out(theta.begin(), theta.end());
  if (sigma == 0.0) return out;
  std::normal_distribution<double> normal(0.0, 1.0);
  for (double& w : out) w += sigma * normal(rng);
  return out;
}

std::vector<LayerView> Unflatten(const MlpSpec& spec,
                                 std::span<const double> theta) {
  if (theta.size() != ParamCount(spec)) {
    throw ShapeError("parameter vector has " + std::to_string(theta.size()) +
                     " entries, network expects " +
                     std::to_string(ParamCount(spec)));
  }
  std::vector<LayerView> layers;
  std::size_t offset = 0;
  for (std::size_t l = 0; l + 1 < spec.layer_sizes.size(); ++l) {
    LayerView view;
    view.n_in = spec.layer_sizes[l];
    view.n_out = spec.layer_sizes[l + 1];
    const auto n_w = static_cast<std::size_t>(view.n_in * view.n_out);
    view.weights = theta.subspan(offset, n_w);
    offset += n_w;
    view.biases = theta.subspan(offset, static_cast<std::size_t>(view.n_out));
    offset += static_cast<std::size_t>(view.n_out);
    layers.push_back(view);
  }
  return layers;
}

ParamVector Flatten(std::span<const LayerView> layers) {
  ParamVector theta;
  for (const LayerView& layer : layers) {
    theta.insert(theta.end(), layer.weights.begin(), layer.weights.end());
    theta.insert(theta.end(), layer.biases.begin(), layer.biases.end());
  }
  return theta;
}

MlpPolicy::MlpPolicy(MlpSpec spec)
    : spec_(std::move(spec)), param_count_(ParamCount(spec_)) {
  if (!spec_.Valid()) throw ShapeError("invalid layer sizes");
  const int widest =
      *std::max_element(spec_.layer_sizes.begin(), spec_.layer_sizes.end());
  buf_a_.resize(static_cast<std::size_t>(widest));
  buf_b_.resize(static_cast<std::size_t>(widest));
}

void MlpPolicy::Forward(std::span<const double> theta,
                        std::span<const double> input, std::span<double> out) {
  if (theta.size() != param_count_) {
    throw ShapeError("parameter vector has " + std::to_string(theta.size()) +
                     " entries, network expects " +
                     std::to_string(param_count_));
  }
  if (input.size() != static_cast<std::size_t>(spec_.InputDim())) {
    throw ShapeError("input has " + std::to_string(input.size()) +
                     " features, network expects " +
                     std::to_string(spec_.InputDim()));
  }
  if (out.size() != static_cast<std::size_t>(spec_.OutputDim())) {
    throw ShapeError("output buffer has " + std::to_string(out.size()) +
                     " entries, network produces " +
                     std::to_string(spec_.OutputDim()));
  }

  std::copy(input.begin(), input.end(), buf_a_.begin());
  const double* w = theta.data();
  double* in = buf_a_.data();
  double* next = buf_b_.data();
  const std::size_t n_layers = spec_.layer_sizes.size() - 1;
  for (std::size_t l = 0; l < n_layers; ++l) {
    const int n_in = spec_.layer_sizes[l];
    const int n_out = spec_.layer_sizes[l + 1];
    const double* bias = w + n_in * n_out;
    int o = 0;
    // Four rows at a time for instruction-level parallelism; each row is
    // still summed in input order, so results match the plain loop exactly.
    for (; o + 4 <= n_out; o += 4) {
      const double* r0 = w + o * n_in;
      const double* r1 = r0 + n_in;
      const double* r2 = r1 + n_in;
      const double* r3 = r2 + n_in;
      double a0 = bias[o], a1 = bias[o + 1], a2 = bias[o + 2], a3 = bias[o + 3];
      for (int i = 0; i < n_in; ++i) {
        a0 += r0[i] * in[i];
        a1 += r1[i] * in[i];
        a2 += r2[i] * in[i];
        a3 += r3[i] * in[i];
      }
      next[o] = std::tanh(a0);
      next[o + 1] = std::tanh(a1);
      next[o + 2] = std::tanh(a2);
      next[o + 3] = std::tanh(a3);
    }
    for (; o < n_out; ++o) {
      const double* row = w + o * n_in;
      double acc = bias[o];
      for (int i = 0; i < n_in; ++i) acc += row[i] * in[i];
      next[o] = std::tanh(acc);
    }
    w = bias + n_out;
    std::swap(in, next);
  }
  std::copy_n(in, out.size(), out.begin());
}

std::vector<double> Forward(std::span<const double> theta, const MlpSpec& spec,
                            std::span<const double> input) {
  MlpPolicy policy(spec);
  std::vector<double> out(static_cast<std::size_t>(spec.OutputDim()));
  policy.Forward(theta, input, out);
  return out;
}

double ScaleToInterval(double raw, const Interval& box) {
  if (raw <= -1.0) return box.lo;
  if (raw >= 1.0) return box.hi;
  const double mid = 0.5 * (box.lo + box.hi);
  const double half = 0.5 * (box.hi - box.lo);
  return std::clamp(mid + raw * half, box.lo, box.hi);
}

Control ScaleOutputs(std::span<const double> raw, const Control& prev,
                     const ActuatorLimits& lim,
                     const std::optional<Interval>& vvc_box, double ts) {
  if (raw.size() != 2) {
    throw ShapeError("vehicle control expects 2 network outputs, got " +
                     std::to_string(raw.size()));
  }
  double v_lo = lim.v_min;
  double v_hi = lim.v_max;
  if (vvc_box) {
    v_lo = std::max(v_lo, vvc_box->lo);
    v_hi = std::min(v_hi, vvc_box->hi);
  }
  const Interval v_box =
      AdmissibleInterval(prev.v, v_lo, v_hi, lim.vdot_min, lim.vdot_max, ts);
  const Interval d_box = SteeringInterval(prev.delta, lim, ts);
  return {ScaleToInterval(raw[kVelocityOutput], v_box),
          ScaleToInterval(raw[kSteerOutput], d_box)};
}

}  // namespace tshc
