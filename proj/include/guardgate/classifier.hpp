#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace guardgate::classifier {

inline constexpr std::uint32_t kFeatureDim = 65536;

// Seed mixed into every feature hash. Changing it invalidates stored models.
inline constexpr std::uint64_t kFeatureSeed = 0x9E3779B97F4A7C15ULL;

enum class Label { Allow, Deny };
enum class Provenance { UserUploaded, Public, Synthetic };

struct LabeledExample {
    std::string text;
    Label label = Label::Allow;
};

struct LabeledDataset {
    std::vector<LabeledExample> examples;
    Provenance provenance = Provenance::UserUploaded;
};

struct TrainConfig {
    double learning_rate = 0.5;
    std::uint32_t epochs = 200;
    // Recorded with the model. Training starts from all-zero weights and is
    // full-batch, so the result does not depend on it.
    std::uint64_t seed = 0;
};

// Sorted by bucket, no duplicate buckets, no zero values.
struct SparseVector {
    std::vector<std::pair<std::uint32_t, double>> entries;

    bool empty() const { return entries.empty(); }
};

using Fingerprint = std::array<std::uint8_t, 32>;

struct ClassifierModel {
    std::uint32_t feature_dim = kFeatureDim;
    std::vector<double> weights = std::vector<double>(kFeatureDim, 0.0);
    double bias = 0.0;
    TrainConfig train_config;
    Fingerprint dataset_fingerprint{};
};

struct Prediction {
    Label label = Label::Allow;
    double deny_probability = 0.5;

    double allow_probability() const { return 1.0 - deny_probability; }
};

// 64-bit FNV-1a over `bytes`, starting from the standard offset basis
// after first absorbing the 8 little-endian bytes of `seed`.
std::uint64_t feature_hash(std::string_view bytes, std::uint64_t seed = kFeatureSeed);

// Casefolded word unigrams (prefix "u\x1f") and adjacent-word bigrams
// (prefix "b\x1f", words joined by "\x1f") hashed into kFeatureDim buckets;
// the value of a bucket is its occurrence count.
SparseVector featurize(std::string_view text);

double logistic(double z);

LabeledDataset parse_dataset(std::string_view content);
LabeledDataset load_dataset(const std::filesystem::path& path);
std::string serialize_dataset(const LabeledDataset& data);

// SHA-256 of serialize_dataset(data).
Fingerprint fingerprint(const LabeledDataset& data);

// Mean logistic loss and its gradient over a pre-featurized dataset.
struct LossAndGradient {
    double loss = 0.0;
    std::vector<double> weight_gradient;
    double bias_gradient = 0.0;
};

struct FeaturizedDataset {
    std::vector<SparseVector> features;
    std::vector<double> targets;  // 1 for Deny, 0 for Allow
};

FeaturizedDataset featurize_dataset(const LabeledDataset& data);

double mean_logistic_loss(std::span<const double> weights, double bias, const FeaturizedDataset& data);
LossAndGradient logistic_loss_gradient(std::span<const double> weights, double bias,
                                       const FeaturizedDataset& data);

struct TrainReport {
    std::vector<double> epoch_loss;  // loss before epoch 0, then after each epoch
    std::uint32_t backtracks = 0;
};

ClassifierModel train(const LabeledDataset& data, const TrainConfig& config,
                      TrainReport* report = nullptr);

// Deny probability, clamped to the open interval (0, 1).
double deny_probability(const ClassifierModel& model, std::string_view text);
Prediction predict(const ClassifierModel& model, std::string_view text, double threshold = 0.5);

std::vector<std::uint8_t> serialize_model(const ClassifierModel& model);
ClassifierModel deserialize_model(std::span<const std::uint8_t> bytes);
void save_model(const ClassifierModel& model, const std::filesystem::path& path);
ClassifierModel load_model(const std::filesystem::path& path);

// Offline few-shot augmentation: deterministic, label-preserving surface
// perturbations of the seeds (see synthetic_perturbations()).
LabeledDataset generate_synthetic_stub(std::span<const LabeledExample> seeds, std::size_t n);

// Names of the perturbations, in the order they are cycled.
std::span<const std::string_view> synthetic_perturbations();

// Bidirectional word substitution table used by the "synonym" perturbation.
std::span<const std::pair<std::string_view, std::string_view>> synonym_table();

std::string_view to_string(Label label);
std::string_view to_string(Provenance provenance);

} // namespace guardgate::classifier
