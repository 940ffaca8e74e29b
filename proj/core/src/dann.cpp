#include "etdann/dann.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <numeric>
#include <ostream>
#include <string>

#include "etdann/adam.hpp"
#include "etdann/error.hpp"
#include "etdann/rng.hpp"

namespace etdann {

namespace {

ShapePlan head_plan(std::size_t input_width, const std::vector<std::size_t>& widths) {
  ShapePlan plan{input_width, {}};
  for (std::size_t i = 0; i < widths.size(); ++i)
    plan.layers.push_back({widths[i], i + 1 == widths.size() ? Activation::Identity : Activation::Relu});
  return plan;
}

Matrix gather_rows(const Matrix& x, const std::vector<std::size_t>& idx) {
  Matrix out(static_cast<Eigen::Index>(idx.size()), x.cols());
  for (std::size_t i = 0; i < idx.size(); ++i)
    out.row(static_cast<Eigen::Index>(i)) = x.row(static_cast<Eigen::Index>(idx[i]));
  return out;
}

Vector gather(const Vector& v, const std::vector<std::size_t>& idx) {
  Vector out(static_cast<Eigen::Index>(idx.size()));
  for (std::size_t i = 0; i < idx.size(); ++i) out(static_cast<Eigen::Index>(i)) = v(static_cast<Eigen::Index>(idx[i]));
  return out;
}

void shuffle(std::vector<std::size_t>& v, Rng& rng) {
  for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[uniform_index(rng, i)]);
}

Matrix stack(const Matrix& top, const Matrix& bottom) {
  Matrix out(top.rows() + bottom.rows(), top.cols());
  out << top, bottom;
  return out;
}

Vector domain_labels(Eigen::Index n_source, Eigen::Index n_target) {
  Vector d(n_source + n_target);
  d.head(n_source).setZero();
  d.tail(n_target).setOnes();
  return d;
}

double balanced_accuracy(const Vector& source_logits, const Vector& target_logits) {
  const double tnr = static_cast<double>((source_logits.array() <= 0.0).count()) /
                     static_cast<double>(source_logits.size());
  const double tpr = static_cast<double>((target_logits.array() > 0.0).count()) /
                     static_cast<double>(target_logits.size());
  return 0.5 * (tnr + tpr);
}

void append(std::vector<std::span<double>>& out, std::vector<std::span<double>> more) {
  out.insert(out.end(), more.begin(), more.end());
}

void append(std::vector<std::span<const double>>& out, std::vector<std::span<const double>> more) {
  out.insert(out.end(), more.begin(), more.end());
}

void feed_hash(std::uint64_t& h, const Mlp& mlp) {
  for (const auto span : mlp.parameters())
    for (const double v : span) {
      std::uint64_t bits = 0;
      std::memcpy(&bits, &v, sizeof bits);
      for (int i = 0; i < 8; ++i) h = (h ^ ((bits >> (8 * i)) & 0xFF)) * 0x100000001b3ULL;
    }
}

void check_inputs(const Matrix& source_x, const Matrix& target_x, Eigen::Index width) {
  if (source_x.cols() != width || target_x.cols() != width)
    throw Error(ErrorCode::DimensionMismatch, "source/target column counts differ from the model");
}

}  // namespace

void DannConfig::validate() const {
  auto fail = [](const std::string& msg) { throw Error(ErrorCode::InvalidConfig, msg); };
  if (feature_width < 1 || feature_depth < 1) fail("feature extractor needs positive width and depth");
  if (regressor_widths.empty() || regressor_widths.back() != 1) fail("regressor_widths must end with 1");
  if (classifier_widths.empty() || classifier_widths.back() != 1) fail("classifier_widths must end with 1");
  for (const auto w : regressor_widths)
    if (w < 1) fail("regressor widths must be positive");
  for (const auto w : classifier_widths)
    if (w < 1) fail("classifier widths must be positive");
  if (epochs < 1) fail("epochs must be >= 1");
  if (batch_size < 2) fail("batch_size must be >= 2");
  if (!(lr > 0.0) || !std::isfinite(lr)) fail("lr must be positive");
  if (fixed_lambda && !(*fixed_lambda >= 0.0)) fail("fixed_lambda must be >= 0");
}

double lambda_schedule(double progress) {
  if (!(progress >= 0.0 && progress <= 1.0))
    throw Error(ErrorCode::OutOfRange, "progress must lie in [0, 1]");
  return 2.0 / (1.0 + std::exp(-10.0 * progress)) - 1.0;
}

void TrainTrace::write_csv(std::ostream& out) const {
  out << "epoch,L_r,L_d,lambda,L_total\n";
  char buf[160];
  for (const auto& e : entries) {
    std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g,%.17g,%.17g\n", e.epoch, e.regression_loss, e.domain_loss,
                  e.lambda, e.total_loss);
    out << buf;
  }
}

DannModel init_dann(std::size_t input_width, const DannConfig& cfg) {
  cfg.validate();
  ShapePlan extractor{input_width, {}};
  for (std::size_t i = 0; i < cfg.feature_depth; ++i) extractor.layers.push_back({cfg.feature_width, Activation::Relu});
  DannModel m;
  m.extractor = init_params(extractor, derive_seed(cfg.seed, 1));
  m.regressor = init_params(head_plan(cfg.feature_width, cfg.regressor_widths), derive_seed(cfg.seed, 2));
  m.classifier = init_params(head_plan(cfg.feature_width, cfg.classifier_widths), derive_seed(cfg.seed, 3));
  return m;
}

BatchGradients batch_gradients(const DannModel& model, const Matrix& source_x, const Vector& source_y,
                               const Matrix& target_x, double lambda, bool domain_head) {
  if (source_x.rows() != source_y.size())
    throw Error(ErrorCode::LengthMismatch, "source rows and labels differ");
  const Eigen::Index n_source = source_x.rows();
  const Matrix inputs = domain_head ? stack(source_x, target_x) : source_x;

  BatchGradients out;
  out.lambda = lambda;

  GradTape extractor_tape;
  const Matrix features = forward(model.extractor, inputs, extractor_tape);

  GradTape regressor_tape;
  const Matrix prediction = forward(model.regressor, features.topRows(n_source), regressor_tape);
  const auto regression = mse_loss(prediction.col(0), source_y);
  out.regression_loss = regression.loss;
  out.regressor = backward(model.regressor, std::move(regressor_tape), regression.grad);

  Matrix feature_grad = Matrix::Zero(features.rows(), features.cols());
  feature_grad.topRows(n_source) = out.regressor.input;

  if (domain_head) {
    GradTape classifier_tape;
    const Matrix logits = forward(model.classifier, grad_reverse(features), classifier_tape);
    const auto domain = bce_loss(sigmoid(logits.col(0)), domain_labels(n_source, target_x.rows()));
    out.domain_loss = domain.loss;
    out.classifier = backward(model.classifier, std::move(classifier_tape), lambda * domain.grad);
    feature_grad += grad_reverse_backward(out.classifier.input, lambda);
  }
  out.total_loss = out.regression_loss + lambda * out.domain_loss;
  out.extractor = backward(model.extractor, std::move(extractor_tape), feature_grad);
  return out;
}

DannFit train_dann(const Matrix& source_x, const Vector& source_y, const Matrix& target_x,
                   const DannConfig& cfg) {
  cfg.validate();
  if (source_x.cols() != target_x.cols())
    throw Error(ErrorCode::DimensionMismatch, "source and target column counts differ");
  if (source_x.rows() != source_y.size())
    throw Error(ErrorCode::LengthMismatch, "source rows and labels differ");
  if (source_x.rows() < static_cast<Eigen::Index>(cfg.batch_size))
    throw Error(ErrorCode::TooFewSamples, "source has fewer rows than batch_size");
  if (target_x.rows() < 2) throw Error(ErrorCode::TooFewSamples, "target needs >= 2 rows");

  DannFit fit;
  DannModel& model = fit.model;
  model = init_dann(static_cast<std::size_t>(source_x.cols()), cfg);
  model.input_scaler = Standardizer::fit(stack(source_x, target_x));
  model.target_scaler = Standardizer::fit(Matrix(source_y));

  const Matrix xs = model.input_scaler.transform(source_x);
  const Matrix xt = model.input_scaler.transform(target_x);
  const Vector ys = model.target_scaler.transform(Matrix(source_y)).col(0);

  const auto n_source = static_cast<std::size_t>(xs.rows());
  const auto n_target = static_cast<std::size_t>(xt.rows());
  const std::size_t batch = cfg.batch_size;
  const std::size_t batches_per_epoch = n_source / batch;
  const std::size_t total_batches = cfg.epochs * batches_per_epoch;

  AdamState adam(AdamConfig{cfg.lr});
  Rng rng(derive_seed(cfg.seed, 4));
  std::vector<std::size_t> order(n_source);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<std::size_t> source_idx(batch);
  std::vector<std::size_t> target_idx(batch);

  std::size_t global = 0;
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    shuffle(order, rng);
    double sum_regression = 0.0;
    double sum_domain = 0.0;
    const double epoch_progress = static_cast<double>(global) / static_cast<double>(total_batches);
    for (std::size_t b = 0; b < batches_per_epoch; ++b, ++global) {
      std::copy_n(order.begin() + static_cast<std::ptrdiff_t>(b * batch), batch, source_idx.begin());
      for (auto& t : target_idx) t = uniform_index(rng, n_target);
      const double progress = static_cast<double>(global) / static_cast<double>(total_batches);
      const double lambda = cfg.fixed_lambda.value_or(lambda_schedule(progress));

      auto grads = batch_gradients(model, gather_rows(xs, source_idx), gather(ys, source_idx),
                                   gather_rows(xt, target_idx), lambda, cfg.domain_head);
      if (!std::isfinite(grads.total_loss))
        throw Error(ErrorCode::DivergedTraining, "non-finite loss at epoch " + std::to_string(epoch));
      sum_regression += grads.regression_loss;
      sum_domain += grads.domain_loss;

      std::vector<std::span<double>> params = model.extractor.parameters();
      append(params, model.regressor.parameters());
      std::vector<std::span<const double>> gradients = grads.extractor.parameters();
      append(gradients, grads.regressor.parameters());
      if (cfg.domain_head) {
        append(params, model.classifier.parameters());
        append(gradients, grads.classifier.parameters());
      }
      adam.step(params, gradients);
    }
    TraceEntry entry;
    entry.epoch = epoch;
    entry.progress = epoch_progress;
    entry.regression_loss = sum_regression / static_cast<double>(batches_per_epoch);
    entry.domain_loss = sum_domain / static_cast<double>(batches_per_epoch);
    entry.lambda = cfg.fixed_lambda.value_or(lambda_schedule(epoch_progress));
    entry.total_loss = entry.regression_loss + entry.lambda * entry.domain_loss;
    fit.trace.entries.push_back(entry);
  }
  return fit;
}

Vector predict_dann(const DannModel& model, const Matrix& x) {
  if (x.cols() != model.input_scaler.width())
    throw Error(ErrorCode::DimensionMismatch, "model expects " + std::to_string(model.input_scaler.width()) +
                                                  " predictors, got " + std::to_string(x.cols()));
  const Matrix z = model.input_scaler.transform(x);
  const Matrix y = forward(model.regressor, forward(model.extractor, z));
  return model.target_scaler.inverse_transform(y).col(0);
}

double domain_confusion(const DannModel& model, const Matrix& source_x, const Matrix& target_x) {
  check_inputs(source_x, target_x, model.input_scaler.width());
  auto logits = [&](const Matrix& x) -> Vector {
    return forward(model.classifier, forward(model.extractor, model.input_scaler.transform(x))).col(0);
  };
  return balanced_accuracy(logits(source_x), logits(target_x));
}

double probe_domain_accuracy(const DannModel& model, const Matrix& source_x, const Matrix& target_x,
                             const ProbeConfig& cfg) {
  check_inputs(source_x, target_x, model.input_scaler.width());
  if (cfg.widths.empty() || cfg.widths.back() != 1 || cfg.batch_size < 1 || cfg.epochs < 1)
    throw Error(ErrorCode::InvalidConfig, "probe needs widths ending in 1 and positive batch/epochs");
  const Matrix fs = forward(model.extractor, model.input_scaler.transform(source_x));
  const Matrix ft = forward(model.extractor, model.input_scaler.transform(target_x));

  Mlp probe = init_params(head_plan(static_cast<std::size_t>(fs.cols()), cfg.widths), derive_seed(cfg.seed, 5));
  AdamState adam(AdamConfig{cfg.lr});
  Rng rng(derive_seed(cfg.seed, 6));
  const auto n_source = static_cast<std::size_t>(fs.rows());
  const auto n_target = static_cast<std::size_t>(ft.rows());
  const std::size_t steps = cfg.epochs * std::max<std::size_t>(1, n_source / cfg.batch_size);
  const Vector labels = domain_labels(static_cast<Eigen::Index>(cfg.batch_size),
                                      static_cast<Eigen::Index>(cfg.batch_size));
  std::vector<std::size_t> si(cfg.batch_size);
  std::vector<std::size_t> ti(cfg.batch_size);
  for (std::size_t step = 0; step < steps; ++step) {
    for (auto& i : si) i = uniform_index(rng, n_source);
    for (auto& i : ti) i = uniform_index(rng, n_target);
    GradTape tape;
    const Matrix logits = forward(probe, stack(gather_rows(fs, si), gather_rows(ft, ti)), tape);
    const auto loss = bce_loss(sigmoid(logits.col(0)), labels);
    const MlpGrad g = backward(probe, std::move(tape), loss.grad);
    adam.step(probe.parameters(), g.parameters());
  }
  return balanced_accuracy(forward(probe, fs).col(0), forward(probe, ft).col(0));
}

std::uint64_t fingerprint(const DannModel& model) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  feed_hash(h, model.extractor);
  feed_hash(h, model.regressor);
  feed_hash(h, model.classifier);
  return h;
}

}  // namespace etdann
