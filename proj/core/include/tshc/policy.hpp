#pragma once

// Fully connected tanh network over one flat parameter vector.
//
// Canonical parameter order, layer by layer: the weight matrix W (n_out rows,
// n_in columns, row-major, so W[o][i] sits at offset o * n_in + i) followed
// by the n_out biases. Every layer, including the output layer, applies tanh
// elementwise, so raw outputs lie in [-1, 1].

#include <cstddef>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <vector>

#include "tshc/dynamics.hpp"

namespace tshc {

using ParamVector = std::vector<double>;
using Rng = std::mt19937_64;

inline constexpr double kInitStddev = 0.001;

// Raised when a vector's length does not match the network shape.
class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct MlpSpec {
  std::vector<int> layer_sizes;  // input dim first, output dim last

  bool Valid() const;
  int InputDim() const { return layer_sizes.front(); }
  int OutputDim() const { return layer_sizes.back(); }
};

std::size_t ParamCount(const MlpSpec& spec);

ParamVector InitParams(const MlpSpec& spec, Rng& rng,
                       double stddev = kInitStddev);

// theta + sigma * zeta with zeta ~ N(0, I); `theta` itself is not modified.
ParamVector Perturb(std::span<const double> theta, double sigma, Rng& rng);

// Views of one layer inside the flat vector.
struct LayerView {
  int n_in = 0;
  int n_out = 0;
  std::span<const double> weights;  // n_out * n_in, row-major
  std::span<const double> biases;   // n_out
};

std::vector<LayerView> Unflatten(const MlpSpec& spec,
                                 std::span<const double> theta);
ParamVector Flatten(std::span<const LayerView> layers);

// Reusable evaluator; owns scratch buffers so repeated Forward calls do not
// allocate. Not thread-safe, create one per worker.
class MlpPolicy {
 public:
  explicit MlpPolicy(MlpSpec spec);

  const MlpSpec& spec() const { return spec_; }

  // Writes OutputDim() raw outputs into `out`. Throws ShapeError on any
  // length mismatch.
  void Forward(std::span<const double> theta, std::span<const double> input,
               std::span<double> out);

  // Recurrent-state hook; a feed-forward network carries no state.
  void ResetState() {}

 private:
  MlpSpec spec_;
  std::size_t param_count_;
  std::vector<double> buf_a_;
  std::vector<double> buf_b_;
};

// Allocating convenience wrapper.
std::vector<double> Forward(std::span<const double> theta, const MlpSpec& spec,
                            std::span<const double> input);

// Affine map of raw in [-1, 1] onto [box.lo, box.hi]; the endpoints are hit
// exactly and ScaleToInterval(-raw, -box) == -ScaleToInterval(raw, box).
double ScaleToInterval(double raw, const Interval& box);

// Maps the vehicle network outputs (index 0 = steering, index 1 = velocity)
// into the admissible box valid at this step. `vvc_box`, when present,
// further tightens the velocity channel.
Control ScaleOutputs(std::span<const double> raw, const Control& prev,
                     const ActuatorLimits& lim,
                     const std::optional<Interval>& vvc_box, double ts);

inline constexpr int kSteerOutput = 0;
inline constexpr int kVelocityOutput = 1;

}  // namespace tshc
