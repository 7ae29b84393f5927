#include "guardgate/classifier.hpp"

#include "guardgate/error.hpp"
#include "guardgate/text.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <array>
#include <bit>
#include <cctype>
#include <cmath>
#include <fstream>
#include <iterator>
#include <limits>
#include <optional>
#include <sstream>

namespace guardgate::classifier {

namespace {

constexpr std::uint64_t kFnvOffset = 14695981039346656037ULL;
constexpr std::uint64_t kFnvPrime = 1099511628211ULL;
constexpr std::array<char, 4> kModelMagic = {'G', 'G', 'L', 'R'};
constexpr std::uint32_t kModelVersion = 1;

// Smallest/largest representable probabilities strictly inside (0, 1) such
// that 1 - p is exact.
constexpr double kMinProbability = 0x1p-53;
constexpr double kMaxProbability = 1.0 - 0x1p-53;

std::uint64_t fnv_absorb(std::uint64_t h, std::string_view bytes) {
    for (unsigned char c : bytes) {
        h ^= c;
        h *= kFnvPrime;
    }
    return h;
}

double softplus(double z) {
    return z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
}

double dot(std::span<const double> weights, const SparseVector& x) {
    double acc = 0.0;
    for (const auto& [index, value] : x.entries) acc += weights[index] * value;
    return acc;
}

void validate_for_training(const LabeledDataset& data) {
    if (data.examples.empty()) {
        throw Error(ErrorCode::EmptyDataset, "dataset has no examples");
    }
    bool has_allow = false;
    bool has_deny = false;
    for (std::size_t i = 0; i < data.examples.size(); ++i) {
        const auto& ex = data.examples[i];
        if (ex.text.empty()) {
            throw Error(ErrorCode::EmptyDataset, "example " + std::to_string(i) + " has empty text");
        }
        (ex.label == Label::Deny ? has_deny : has_allow) = true;
    }
    if (!has_allow || !has_deny) {
        throw Error(ErrorCode::SingleClassDataset,
                    "dataset needs at least one allow and one deny example");
    }
}

// Little-endian byte writer/reader for the model file.
class ByteWriter {
public:
    void u32(std::uint32_t v) {
        for (int i = 0; i < 4; ++i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }
    void u64(std::uint64_t v) {
        for (int i = 0; i < 8; ++i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }
    void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
    void raw(std::span<const std::uint8_t> bytes) { out_.insert(out_.end(), bytes.begin(), bytes.end()); }

    std::vector<std::uint8_t> take() { return std::move(out_); }

private:
    std::vector<std::uint8_t> out_;
};

class ByteReader {
public:
    explicit ByteReader(std::span<const std::uint8_t> in) : in_(in) {}

    std::uint32_t u32() {
        need(4);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(in_[pos_++]) << (8 * i);
        return v;
    }
    std::uint64_t u64() {
        need(8);
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(in_[pos_++]) << (8 * i);
        return v;
    }
    double f64() { return std::bit_cast<double>(u64()); }
    void raw(std::span<std::uint8_t> out) {
        need(out.size());
        std::copy_n(in_.begin() + static_cast<std::ptrdiff_t>(pos_), out.size(), out.begin());
        pos_ += out.size();
    }
    bool done() const { return pos_ == in_.size(); }

private:
    void need(std::size_t n) const {
        if (in_.size() - pos_ < n) throw Error(ErrorCode::InvalidModel, "model file truncated");
    }

    std::span<const std::uint8_t> in_;
    std::size_t pos_ = 0;
};

std::string ascii_lower(std::string_view s) {
    std::string out(s);
    for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
}

std::string ascii_upper(std::string_view s) {
    std::string out(s);
    for (auto& c : out) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    return out;
}

bool ascii_word_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0; }

std::string title_case(std::string_view s) {
    std::string out(s);
    bool at_word_start = true;
    for (auto& c : out) {
        const auto u = static_cast<unsigned char>(c);
        if (ascii_word_char(c)) {
            c = static_cast<char>(at_word_start ? std::toupper(u) : std::tolower(u));
            at_word_start = false;
        } else {
            at_word_start = true;
        }
    }
    return out;
}

std::string end_with(std::string_view s, char mark) {
    std::size_t end = s.size();
    while (end > 0 && (s[end - 1] == '.' || s[end - 1] == '!' || s[end - 1] == '?' || s[end - 1] == ' ')) {
        --end;
    }
    std::string out(s.substr(0, end));
    out += mark;
    return out;
}

std::optional<std::string> substitute_synonym(std::string_view s) {
    std::size_t i = 0;
    while (i < s.size()) {
        if (!ascii_word_char(s[i])) {
            ++i;
            continue;
        }
        std::size_t j = i;
        while (j < s.size() && ascii_word_char(s[j])) ++j;
        const std::string word = ascii_lower(s.substr(i, j - i));
        for (const auto& [a, b] : synonym_table()) {
            std::string_view replacement;
            if (word == a) replacement = b;
            else if (word == b) replacement = a;
            else continue;
            std::string out(s.substr(0, i));
            out += replacement;
            out += s.substr(j);
            return out;
        }
        i = j;
    }
    return std::nullopt;
}

constexpr std::array<std::string_view, 6> kPerturbations = {
    "uppercase", "lowercase", "synonym", "exclaim", "question", "titlecase",
};

constexpr std::array<std::pair<std::string_view, std::string_view>, 16> kSynonyms = {{
    {"bad", "terrible"},
    {"good", "fine"},
    {"kill", "murder"},
    {"help", "assist"},
    {"stop", "halt"},
    {"big", "large"},
    {"small", "little"},
    {"quick", "fast"},
    {"angry", "furious"},
    {"happy", "glad"},
    {"buy", "purchase"},
    {"money", "cash"},
    {"doctor", "physician"},
    {"urgent", "pressing"},
    {"hate", "despise"},
    {"weapon", "arm"},
}};

std::string perturb(std::string_view text, std::size_t which) {
    switch (which) {
        case 0: return ascii_upper(text);
        case 1: return ascii_lower(text);
        case 2: return substitute_synonym(text).value_or(title_case(text));
        case 3: return end_with(text, '!');
        case 4: return end_with(text, '?');
        default: return title_case(text);
    }
}

} // namespace

std::uint64_t feature_hash(std::string_view bytes, std::uint64_t seed) {
    std::uint64_t h = kFnvOffset;
    for (int i = 0; i < 8; ++i) {
        h ^= static_cast<std::uint8_t>(seed >> (8 * i));
        h *= kFnvPrime;
    }
    return fnv_absorb(h, bytes);
}

SparseVector featurize(std::string_view input) {
    const auto tokens = text::words(input);
    std::vector<std::uint32_t> buckets;
    buckets.reserve(tokens.size() * 2);
    const auto bucket = [](std::string_view key) {
        return static_cast<std::uint32_t>(feature_hash(key) & (kFeatureDim - 1));
    };
    std::string key;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        key = "u\x1f";
        key += tokens[i];
        buckets.push_back(bucket(key));
        if (i + 1 < tokens.size()) {
            key = "b\x1f";
            key += tokens[i];
            key += '\x1f';
            key += tokens[i + 1];
            buckets.push_back(bucket(key));
        }
    }
    std::sort(buckets.begin(), buckets.end());
    SparseVector out;
    for (std::size_t i = 0; i < buckets.size();) {
        std::size_t j = i;
        while (j < buckets.size() && buckets[j] == buckets[i]) ++j;
        out.entries.emplace_back(buckets[i], static_cast<double>(j - i));
        i = j;
    }
    return out;
}

double logistic(double z) {
    if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

LabeledDataset parse_dataset(std::string_view content) {
    LabeledDataset data;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= content.size()) {
        std::size_t nl = content.find('\n', pos);
        if (nl == std::string_view::npos) nl = content.size();
        std::string_view line = content.substr(pos, nl - pos);
        pos = nl + 1;
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (line.empty() || line.front() == '#') {
            if (nl == content.size()) break;
            continue;
        }
        const std::size_t tab = line.find('\t');
        if (tab == std::string_view::npos) {
            throw Error(ErrorCode::ParseError,
                        "dataset line " + std::to_string(line_no) + ": expected label<TAB>text");
        }
        const std::string label = ascii_lower(line.substr(0, tab));
        LabeledExample ex;
        if (label == "allow") ex.label = Label::Allow;
        else if (label == "deny") ex.label = Label::Deny;
        else {
            throw Error(ErrorCode::ParseError,
                        "dataset line " + std::to_string(line_no) + ": unknown label '" + label + "'");
        }
        ex.text = std::string(line.substr(tab + 1));
        if (ex.text.empty()) {
            throw Error(ErrorCode::ParseError, "dataset line " + std::to_string(line_no) + ": empty text");
        }
        data.examples.push_back(std::move(ex));
        if (nl == content.size()) break;
    }
    return data;
}

LabeledDataset load_dataset(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::IoError, "cannot open dataset " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_dataset(buf.str());
}

std::string serialize_dataset(const LabeledDataset& data) {
    std::string out;
    for (const auto& ex : data.examples) {
        out += to_string(ex.label);
        out += '\t';
        out += ex.text;
        out += '\n';
    }
    return out;
}

Fingerprint fingerprint(const LabeledDataset& data) {
    const std::string bytes = serialize_dataset(data);
    Fingerprint digest{};
    unsigned int len = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), digest.data(), &len, EVP_sha256(), nullptr) != 1 ||
        len != digest.size()) {
        throw std::runtime_error("SHA-256 digest failed");
    }
    return digest;
}

FeaturizedDataset featurize_dataset(const LabeledDataset& data) {
    FeaturizedDataset out;
    out.features.reserve(data.examples.size());
    out.targets.reserve(data.examples.size());
    for (const auto& ex : data.examples) {
        out.features.push_back(featurize(ex.text));
        out.targets.push_back(ex.label == Label::Deny ? 1.0 : 0.0);
    }
    return out;
}

double mean_logistic_loss(std::span<const double> weights, double bias, const FeaturizedDataset& data) {
    double total = 0.0;
    for (std::size_t i = 0; i < data.features.size(); ++i) {
        const double z = dot(weights, data.features[i]) + bias;
        total += softplus(z) - data.targets[i] * z;
    }
    return total / static_cast<double>(data.features.size());
}

LossAndGradient logistic_loss_gradient(std::span<const double> weights, double bias,
                                       const FeaturizedDataset& data) {
    LossAndGradient out;
    out.weight_gradient.assign(weights.size(), 0.0);
    const double n = static_cast<double>(data.features.size());
    for (std::size_t i = 0; i < data.features.size(); ++i) {
        const double z = dot(weights, data.features[i]) + bias;
        out.loss += softplus(z) - data.targets[i] * z;
        const double residual = logistic(z) - data.targets[i];
        for (const auto& [index, value] : data.features[i].entries) {
            out.weight_gradient[index] += residual * value;
        }
        out.bias_gradient += residual;
    }
    out.loss /= n;
    for (auto& g : out.weight_gradient) g /= n;
    out.bias_gradient /= n;
    return out;
}

ClassifierModel train(const LabeledDataset& data, const TrainConfig& config, TrainReport* report) {
    validate_for_training(data);
    if (!(config.learning_rate > 0.0) || !std::isfinite(config.learning_rate)) {
        throw Error(ErrorCode::InvalidModel, "learning rate must be positive and finite");
    }

    const FeaturizedDataset features = featurize_dataset(data);
    ClassifierModel model;
    model.train_config = config;
    model.dataset_fingerprint = fingerprint(data);

    std::vector<double> candidate(model.weights.size());
    double loss = mean_logistic_loss(model.weights, model.bias, features);
    if (report) report->epoch_loss.push_back(loss);

    // Full-batch gradient descent. A step that would raise the loss is halved
    // until it does not; this only triggers when learning_rate exceeds the
    // local curvature bound, and keeps the per-epoch loss non-increasing.
    constexpr int kMaxHalvings = 40;
    for (std::uint32_t epoch = 0; epoch < config.epochs; ++epoch) {
        const LossAndGradient lg = logistic_loss_gradient(model.weights, model.bias, features);
        double step = config.learning_rate;
        bool accepted = false;
        for (int h = 0; h <= kMaxHalvings; ++h) {
            for (std::size_t k = 0; k < candidate.size(); ++k) {
                candidate[k] = model.weights[k] - step * lg.weight_gradient[k];
            }
            const double candidate_bias = model.bias - step * lg.bias_gradient;
            const double candidate_loss = mean_logistic_loss(candidate, candidate_bias, features);
            if (candidate_loss <= loss) {
                model.weights.swap(candidate);
                model.bias = candidate_bias;
                loss = candidate_loss;
                accepted = true;
                break;
            }
            step *= 0.5;
            if (report) ++report->backtracks;
        }
        if (report) report->epoch_loss.push_back(loss);
        if (!accepted) break;
    }
    return model;
}

double deny_probability(const ClassifierModel& model, std::string_view input) {
    const double z = dot(model.weights, featurize(input)) + model.bias;
    return std::clamp(logistic(z), kMinProbability, kMaxProbability);
}

Prediction predict(const ClassifierModel& model, std::string_view input, double threshold) {
    Prediction p;
    p.deny_probability = deny_probability(model, input);
    p.label = p.deny_probability >= threshold ? Label::Deny : Label::Allow;
    return p;
}

std::vector<std::uint8_t> serialize_model(const ClassifierModel& model) {
    ByteWriter w;
    w.raw(std::span(reinterpret_cast<const std::uint8_t*>(kModelMagic.data()), kModelMagic.size()));
    w.u32(kModelVersion);
    w.u32(model.feature_dim);
    w.f64(model.bias);
    for (double v : model.weights) w.f64(v);
    w.raw(model.dataset_fingerprint);
    w.f64(model.train_config.learning_rate);
    w.u32(model.train_config.epochs);
    w.u64(model.train_config.seed);
    return w.take();
}

ClassifierModel deserialize_model(std::span<const std::uint8_t> bytes) {
    ByteReader r(bytes);
    std::array<std::uint8_t, 4> magic{};
    r.raw(magic);
    if (!std::equal(magic.begin(), magic.end(), kModelMagic.begin(),
                    [](std::uint8_t a, char b) { return a == static_cast<std::uint8_t>(b); })) {
        throw Error(ErrorCode::InvalidModel, "bad model magic");
    }
    if (const auto version = r.u32(); version != kModelVersion) {
        throw Error(ErrorCode::InvalidModel, "unsupported model version " + std::to_string(version));
    }
    ClassifierModel model;
    model.feature_dim = r.u32();
    if (model.feature_dim != kFeatureDim) {
        throw Error(ErrorCode::InvalidModel, "feature dimension must be " + std::to_string(kFeatureDim));
    }
    model.bias = r.f64();
    for (auto& v : model.weights) v = r.f64();
    r.raw(model.dataset_fingerprint);
    model.train_config.learning_rate = r.f64();
    model.train_config.epochs = r.u32();
    model.train_config.seed = r.u64();
    if (!r.done()) throw Error(ErrorCode::InvalidModel, "trailing bytes after model");
    const bool finite = std::isfinite(model.bias) &&
                        std::all_of(model.weights.begin(), model.weights.end(),
                                    [](double v) { return std::isfinite(v); });
    if (!finite) throw Error(ErrorCode::InvalidModel, "model has non-finite parameters");
    return model;
}

void save_model(const ClassifierModel& model, const std::filesystem::path& path) {
    const auto bytes = serialize_model(model);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::IoError, "cannot write model " + path.string());
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error(ErrorCode::IoError, "short write to " + path.string());
}

ClassifierModel load_model(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::IoError, "cannot open model " + path.string());
    const std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return deserialize_model(bytes);
}

LabeledDataset generate_synthetic_stub(std::span<const LabeledExample> seeds, std::size_t n) {
    LabeledDataset out;
    out.provenance = Provenance::Synthetic;
    if (seeds.empty()) return out;
    out.examples.reserve(n);
    for (std::size_t k = 0; k < n; ++k) {
        const auto& seed = seeds[k % seeds.size()];
        const std::size_t which = (k / seeds.size()) % kPerturbations.size();
        out.examples.push_back(LabeledExample{perturb(seed.text, which), seed.label});
    }
    return out;
}

std::span<const std::string_view> synthetic_perturbations() { return kPerturbations; }

std::span<const std::pair<std::string_view, std::string_view>> synonym_table() { return kSynonyms; }

std::string_view to_string(Label label) { return label == Label::Deny ? "deny" : "allow"; }

std::string_view to_string(Provenance provenance) {
    switch (provenance) {
        case Provenance::UserUploaded: return "user_uploaded";
        case Provenance::Public:       return "public";
        case Provenance::Synthetic:    return "synthetic";
    }
    return "unknown";
}

} // namespace guardgate::classifier
