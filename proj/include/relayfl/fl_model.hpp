#pragma once

#include <Eigen/Core>
#include <cstddef>
#include <span>
#include <vector>

#include "relayfl/rng.hpp"

namespace relayfl {

/// Labelled samples, one column per sample.
struct Samples {
  Eigen::MatrixXd features;  // inputs x count
  std::vector<int> labels;   // in [0, classes)

  std::size_t size() const { return labels.size(); }
};

/**
 * One-hidden-layer network: sigmoid hidden units, softmax output.
 *
 * Parameters live in one flat vector laid out as W1 (hidden x inputs,
 * column-major), b1, W2 (classes x hidden, column-major), b2, so a model can
 * be averaged or perturbed as a plain vector.
 */
struct MlpShape {
  std::size_t inputs = 64;
  std::size_t hidden = 50;
  std::size_t classes = 10;

  std::size_t n_params() const { return hidden * inputs + hidden + classes * hidden + classes; }

  /// Uniform Glorot initialisation.
  Eigen::VectorXd initial_weights(Rng& rng) const;

  /// Class probabilities, classes x count.
  Eigen::MatrixXd predict(const Eigen::VectorXd& w, const Eigen::MatrixXd& x) const;
};

/// Mean cross-entropy of the softmax outputs over the samples.
double local_loss(const MlpShape& shape, const Eigen::VectorXd& w, const Samples& data);

/// Gradient of local_loss with respect to the flat parameter vector.
Eigen::VectorXd loss_gradient(const MlpShape& shape, const Eigen::VectorXd& w, const Samples& data);

/// `iterations` full-batch gradient steps w <- w - mu grad F(w).
/// Throws std::runtime_error if the weights stop being finite.
Eigen::VectorXd local_update(const MlpShape& shape, Eigen::VectorXd w, const Samples& data, double mu,
                             std::size_t iterations);

/**
 * Dataset-size weighted mean sum D_n w_n / sum D_n, accumulated in model
 * order as w_0 + sum (D_n / D)(w_n - w_0) so that identical models average
 * to themselves exactly. Throws std::invalid_argument on empty input, a size
 * mismatch or non-positive total weight.
 */
Eigen::VectorXd aggregate(std::span<const Eigen::VectorXd> models, std::span<const double> sizes);

/// Fraction of samples whose arg-max class equals the label (ties to the lowest class).
double accuracy(const MlpShape& shape, const Eigen::VectorXd& w, const Samples& data);

}  // namespace relayfl
