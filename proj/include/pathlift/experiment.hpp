#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "pathlift/autodiff.hpp"
#include "pathlift/net.hpp"
#include "pathlift/pruning.hpp"
#include "pathlift/transforms.hpp"

namespace pathlift {

enum class Dataset { TwoGaussians, Xor };

std::string to_string(Dataset d);

struct ExperimentConfig {
  std::uint64_t seed = 0;
  Dataset dataset = Dataset::TwoGaussians;
  std::size_t train_size = 2000;
  std::size_t test_size = 500;
  std::vector<std::size_t> widths{2, 16, 16, 2};
  std::size_t epochs = 200;
  double learning_rate = 0.1;
  std::size_t batch_size = 50;
  std::size_t rewind_epoch = 10;
  double prune_fraction = 0.5;
  bool prune_biases = false;
  RescalePreset preset = RescalePreset::fixed();
  std::vector<Criterion> criteria{Criterion::PathMag, Criterion::Magnitude};
  LossKind loss = LossKind::Logistic;
  std::size_t obd_batch = 200;      // training points used by OBD scores
  std::size_t hutchinson_probes = 32;
  bool parallel = true;             // run arms on separate threads

  // Throws InvalidConfig.
  void validate() const;
};

/// Reads a JSON object whose keys mirror ExperimentConfig fields; absent keys
/// keep their defaults. Throws ParseError or InvalidConfig.
ExperimentConfig parse_experiment_config(std::string_view text);
std::string experiment_config_to_json(const ExperimentConfig& config);

struct SyntheticData {
  std::vector<std::vector<double>> train_x, train_y, test_x, test_y;
  std::vector<std::size_t> train_label, test_label;
};

SyntheticData make_dataset(const ExperimentConfig& config);

/// Fraction of points whose predicted class (arg-max output, or a threshold
/// for a single output) matches the label.
double accuracy(const Architecture& arch, const ParamVector& theta,
                const std::vector<std::vector<double>>& xs, const std::vector<std::size_t>& labels,
                LossKind loss = LossKind::Logistic);

struct ArmResult {
  Criterion criterion = Criterion::PathMag;
  bool rescaled = false;
  double test_accuracy = 0.0;
  std::size_t pruned = 0;
  Mask mask;
  std::size_t hamming_to_unrescaled = 0;  // 0 for unrescaled arms
};

struct ExperimentReport {
  ExperimentConfig config;
  std::uint64_t rescale_seed = 0;  // seed handed to random_rescaling
  double dense_test_accuracy = 0.0;
  std::vector<ArmResult> arms;
  Network dense;  // trained dense network
};

/// Train, snapshot at the rewind epoch, then per criterion and per
/// {unrescaled, randomly rescaled}: score the trained weights, prune, rewind
/// the survivors to the snapshot and fine-tune with the mask frozen. Plain
/// mini-batch gradient descent on the mean loss; the batch order of an epoch
/// depends only on (seed, epoch).
ExperimentReport run_experiment(const ExperimentConfig& config);

std::string report_to_json(const ExperimentReport& report);
// One row per arm: criterion, rescaled, accuracy, Hamming distance.
std::string report_table(const ExperimentReport& report);

}  // namespace pathlift
