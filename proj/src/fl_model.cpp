#include "relayfl/fl_model.hpp"

#include <cmath>
#include <stdexcept>

namespace relayfl {

namespace {

struct Layers {
  Eigen::Map<const Eigen::MatrixXd> w1;
  Eigen::Map<const Eigen::VectorXd> b1;
  Eigen::Map<const Eigen::MatrixXd> w2;
  Eigen::Map<const Eigen::VectorXd> b2;
};

Layers view(const MlpShape& s, const Eigen::VectorXd& w) {
  if (std::size_t(w.size()) != s.n_params()) throw std::invalid_argument("weight vector has wrong size");
  const double* p = w.data();
  const auto h = Eigen::Index(s.hidden), in = Eigen::Index(s.inputs), c = Eigen::Index(s.classes);
  return Layers{Eigen::Map<const Eigen::MatrixXd>(p, h, in), Eigen::Map<const Eigen::VectorXd>(p + h * in, h),
                Eigen::Map<const Eigen::MatrixXd>(p + h * in + h, c, h),
                Eigen::Map<const Eigen::VectorXd>(p + h * in + h + c * h, c)};
}

Eigen::MatrixXd hidden_activations(const Layers& l, const Eigen::MatrixXd& x) {
  Eigen::MatrixXd z = l.w1 * x;
  z.colwise() += l.b1;
  return z.unaryExpr([](double v) { return 1.0 / (1.0 + std::exp(-v)); });
}

// Column-wise softmax, shifted by the column max for stability.
Eigen::MatrixXd softmax(Eigen::MatrixXd z) {
  for (Eigen::Index j = 0; j < z.cols(); ++j) {
    auto col = z.col(j);
    col.array() -= col.maxCoeff();
    col = col.array().exp();
    col /= col.sum();
  }
  return z;
}

Eigen::MatrixXd output_probabilities(const Layers& l, const Eigen::MatrixXd& a1) {
  Eigen::MatrixXd z = l.w2 * a1;
  z.colwise() += l.b2;
  return softmax(std::move(z));
}

void check_labels(const MlpShape& s, const Samples& data) {
  if (std::size_t(data.features.cols()) != data.size() || std::size_t(data.features.rows()) != s.inputs) {
    throw std::invalid_argument("sample matrix does not match the model shape");
  }
  for (int y : data.labels) {
    if (y < 0 || std::size_t(y) >= s.classes) throw std::invalid_argument("label out of range");
  }
}

}  // namespace

Eigen::VectorXd MlpShape::initial_weights(Rng& rng) const {
  Eigen::VectorXd w = Eigen::VectorXd::Zero(Eigen::Index(n_params()));
  const double r1 = std::sqrt(6.0 / double(inputs + hidden));
  const double r2 = std::sqrt(6.0 / double(hidden + classes));
  const std::size_t n1 = hidden * inputs;
  const std::size_t n2_start = n1 + hidden;
  for (std::size_t i = 0; i < n1; ++i) w(Eigen::Index(i)) = rng.uniform(-r1, r1);
  for (std::size_t i = 0; i < classes * hidden; ++i) w(Eigen::Index(n2_start + i)) = rng.uniform(-r2, r2);
  return w;
}

Eigen::MatrixXd MlpShape::predict(const Eigen::VectorXd& w, const Eigen::MatrixXd& x) const {
  const Layers l = view(*this, w);
  return output_probabilities(l, hidden_activations(l, x));
}

double local_loss(const MlpShape& shape, const Eigen::VectorXd& w, const Samples& data) {
  check_labels(shape, data);
  if (data.size() == 0) return 0.0;
  const Eigen::MatrixXd p = shape.predict(w, data.features);
  double total = 0.0;
  for (std::size_t j = 0; j < data.size(); ++j) total -= std::log(p(data.labels[j], Eigen::Index(j)));
  return total / double(data.size());
}

Eigen::VectorXd loss_gradient(const MlpShape& shape, const Eigen::VectorXd& w, const Samples& data) {
  check_labels(shape, data);
  Eigen::VectorXd g = Eigen::VectorXd::Zero(w.size());
  if (data.size() == 0) return g;
  const Layers l = view(shape, w);
  const Eigen::MatrixXd a1 = hidden_activations(l, data.features);
  Eigen::MatrixXd dz2 = output_probabilities(l, a1);
  for (std::size_t j = 0; j < data.size(); ++j) dz2(data.labels[j], Eigen::Index(j)) -= 1.0;
  dz2 /= double(data.size());

  const Eigen::MatrixXd dz1 = (l.w2.transpose() * dz2).cwiseProduct(a1.cwiseProduct((1.0 - a1.array()).matrix()));

  const auto h = Eigen::Index(shape.hidden), in = Eigen::Index(shape.inputs), c = Eigen::Index(shape.classes);
  double* p = g.data();
  Eigen::Map<Eigen::MatrixXd>(p, h, in) = dz1 * data.features.transpose();
  Eigen::Map<Eigen::VectorXd>(p + h * in, h) = dz1.rowwise().sum();
  Eigen::Map<Eigen::MatrixXd>(p + h * in + h, c, h) = dz2 * a1.transpose();
  Eigen::Map<Eigen::VectorXd>(p + h * in + h + c * h, c) = dz2.rowwise().sum();
  return g;
}

Eigen::VectorXd local_update(const MlpShape& shape, Eigen::VectorXd w, const Samples& data, double mu,
                             std::size_t iterations) {
  for (std::size_t i = 0; i < iterations; ++i) {
    w -= mu * loss_gradient(shape, w, data);
    if (!w.allFinite()) throw std::runtime_error("local update diverged: non-finite weights");
  }
  return w;
}

Eigen::VectorXd aggregate(std::span<const Eigen::VectorXd> models, std::span<const double> sizes) {
  if (models.empty() || models.size() != sizes.size()) {
    throw std::invalid_argument("aggregate: need one dataset size per model");
  }
  double total = 0.0;
  for (std::size_t i = 0; i < models.size(); ++i) {
    if (models[i].size() != models[0].size()) throw std::invalid_argument("aggregate: model dimension mismatch");
    total += sizes[i];
  }
  if (!(total > 0.0)) throw std::invalid_argument("aggregate: total dataset size must be positive");
  Eigen::VectorXd mean = models[0];
  for (std::size_t i = 1; i < models.size(); ++i) mean += (sizes[i] / total) * (models[i] - models[0]);
  return mean;
}

double accuracy(const MlpShape& shape, const Eigen::VectorXd& w, const Samples& data) {
  check_labels(shape, data);
  if (data.size() == 0) return 0.0;
  const Eigen::MatrixXd p = shape.predict(w, data.features);
  std::size_t hits = 0;
  for (std::size_t j = 0; j < data.size(); ++j) {
    Eigen::Index best = 0;
    p.col(Eigen::Index(j)).maxCoeff(&best);
    if (best == data.labels[j]) ++hits;
  }
  return double(hits) / double(data.size());
}

}  // namespace relayfl
