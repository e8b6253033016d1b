#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "spectromind/common.hpp"

namespace spectromind {

struct DatasetManifest {
    std::vector<std::string> subject_ids;
    std::vector<std::string> class_names;
    std::uint32_t sampling_rate_hz = 1000;
    std::uint32_t trial_length_samples = 500;
    std::uint32_t channel_count = 128;

    std::size_t num_classes() const { return class_names.size(); }
    void validate() const;  // throws ConfigError on invariant violations
};

// One stimulus presentation: [channels x time] in microvolts, channels-major.
// Stored on disk as float32; held in memory as double for the DSP chain.
struct Trial {
    std::string trial_id;
    std::string subject_id;
    std::string image_id;
    int label_index = 0;
    std::size_t channels = 0;
    std::size_t samples = 0;
    std::vector<double> data;

    double* channel(std::size_t c) { return data.data() + c * samples; }
    const double* channel(std::size_t c) const { return data.data() + c * samples; }
    bool all_finite() const;
};

struct Dataset {
    DatasetManifest manifest;
    std::vector<Trial> trials;
    std::uint64_t content_hash = 0;
};

struct SplitRatios {
    double train = 0.8, val = 0.1, test = 0.1;
};

struct Splits {
    std::vector<std::size_t> train, val, test;
    std::uint64_t dataset_hash = 0;
    std::uint64_t provenance_hash = 0;  // digest of (dataset_hash, ratios, seed)
    std::uint64_t seed = 0;
};

// One sinusoid of a class signature. channel == -1 applies it to every channel.
struct SignatureComponent {
    double freq_hz = 0.0;
    double amplitude = 0.0;
    int channel = -1;
};
using ClassSignature = std::vector<SignatureComponent>;

struct TeacherOutput {
    enum class Kind { logits, probabilities };
    std::string image_id;
    Kind kind = Kind::probabilities;
    std::vector<double> values;
};

struct EmbeddingRecord {
    std::string image_id;
    std::vector<double> embedding;
    int label_index = 0;
};

// --- dataset directory format -------------------------------------------------
// <root>/manifest.json, <root>/labels.jsonl, <root>/trials/<trial_id>.eegt

Dataset import_dataset(const std::filesystem::path& root);
void write_dataset(const std::filesystem::path& root, const Dataset& ds);

Dataset generate_synthetic(const DatasetManifest& manifest,
                           const std::vector<ClassSignature>& class_signatures,
                           std::size_t trials_per_class, double noise_std, std::uint64_t seed);

// Channel-coded signatures: every channel carries one tone drawn from a small
// frequency alphabet; the per-channel assignment is the class code. Codes are
// chosen greedily for pairwise Hamming distance, deterministically.
std::vector<ClassSignature> make_channel_coded_signatures(std::size_t num_classes,
                                                          std::size_t channels,
                                                          const std::vector<double>& freq_alphabet,
                                                          double amplitude = 1.0);

Splits split_dataset(const Dataset& ds, const SplitRatios& ratios, std::uint64_t seed);

// --- teacher / embedding files --------------------------------------------------

std::map<std::string, TeacherOutput> load_teacher_outputs(const std::filesystem::path& path);
void save_teacher_outputs(const std::filesystem::path& path,
                          const std::vector<TeacherOutput>& rows);
// throws DataError listing image_ids in `ds` with no teacher row
void validate_teacher_coverage(const Dataset& ds,
                               const std::map<std::string, TeacherOutput>& teacher);
std::vector<TeacherOutput> make_onehot_teacher(const Dataset& ds);

std::vector<EmbeddingRecord> load_embeddings(const std::filesystem::path& path);
void save_embeddings(const std::filesystem::path& path, const std::vector<EmbeddingRecord>& recs);

std::uint64_t dataset_content_hash(const Dataset& ds);

}  // namespace spectromind
