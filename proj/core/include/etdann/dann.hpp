#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <vector>

#include "etdann/matrix.hpp"
#include "etdann/neural.hpp"
#include "etdann/standardizer.hpp"

namespace etdann {

struct DannConfig {
  std::size_t feature_width = 64;
  std::size_t feature_depth = 2;
  std::vector<std::size_t> regressor_widths{32, 1};   // last entry is the ET output
  std::vector<std::size_t> classifier_widths{32, 1};  // last entry is the domain logit
  std::size_t epochs = 50;
  std::size_t batch_size = 128;
  double lr = 1e-3;
  std::uint64_t seed = 0;
  // false trains the same extractor + regressor with no domain classifier
  // (the pooled baseline). Batch sampling is unchanged.
  bool domain_head = true;
  // Overrides the progress schedule when set.
  std::optional<double> fixed_lambda;

  void validate() const;
};

// 2 / (1 + exp(-10 progress)) - 1; throws OutOfRange outside [0, 1].
double lambda_schedule(double progress);

struct TraceEntry {
  std::size_t epoch = 0;
  double progress = 0.0;         // at the epoch's first batch
  double regression_loss = 0.0;  // epoch mean, standardized units
  double domain_loss = 0.0;      // epoch mean
  double lambda = 0.0;           // at the epoch's first batch
  double total_loss = 0.0;       // regression_loss + lambda * domain_loss
};

struct TrainTrace {
  std::vector<TraceEntry> entries;

  // Columns: epoch,L_r,L_d,lambda,L_total.
  void write_csv(std::ostream& out) const;
};

struct DannModel {
  Mlp extractor;
  Mlp regressor;
  Mlp classifier;
  Standardizer input_scaler;   // pooled source + target predictors
  Standardizer target_scaler;  // source ET only, one column
};

struct DannFit {
  DannModel model;
  TrainTrace trace;
};

// Unsupervised domain adaptation: the target site contributes predictors
// only. Each step draws a shuffled source batch and an equal-size target
// batch (with replacement), regresses on the source half, classifies the
// domain of both halves (source 0, target 1) through a gradient-reversal
// layer of strength lambda, and takes one Adam step on L_r + lambda * L_d.
// lambda follows lambda_schedule(global_batch / total_batches).
//
// Throws TooFewSamples, DimensionMismatch, ZeroVariance, InvalidConfig and
// DivergedTraining.
DannFit train_dann(const Matrix& source_x, const Vector& source_y, const Matrix& target_x,
                   const DannConfig& cfg);

Vector predict_dann(const DannModel& model, const Matrix& x);

// Balanced accuracy of the model's own domain classifier; 0.5 means the
// features carry no usable domain signal for it.
double domain_confusion(const DannModel& model, const Matrix& source_x, const Matrix& target_x);

struct ProbeConfig {
  std::vector<std::size_t> widths{32, 1};
  std::size_t epochs = 5;
  std::size_t batch_size = 128;
  double lr = 1e-3;
  std::uint64_t seed = 0;
};

// Trains a fresh classifier on the model's frozen extractor features and
// returns its balanced accuracy on the same rows.
double probe_domain_accuracy(const DannModel& model, const Matrix& source_x, const Matrix& target_x,
                             const ProbeConfig& cfg);

std::uint64_t fingerprint(const DannModel& model);

// One step's losses and gradients on already-standardized batches.
// Exposed for gradient checking. Without a domain head the classifier
// gradient is empty and target_x is ignored.
struct BatchGradients {
  double regression_loss = 0.0;
  double domain_loss = 0.0;
  double lambda = 0.0;
  double total_loss = 0.0;
  MlpGrad extractor;
  MlpGrad regressor;
  MlpGrad classifier;
};

BatchGradients batch_gradients(const DannModel& model, const Matrix& source_x, const Vector& source_y,
                               const Matrix& target_x, double lambda, bool domain_head);

// Fresh, untrained networks for cfg and the given input width.
DannModel init_dann(std::size_t input_width, const DannConfig& cfg);

}  // namespace etdann
