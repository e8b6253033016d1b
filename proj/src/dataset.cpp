#include "spectromind/dataset.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include <json.hpp>

#include "spectromind/io_util.hpp"
#include "spectromind/rng.hpp"

static_assert(std::endian::native == std::endian::little,
              "on-disk formats are little-endian; big-endian hosts unsupported");

namespace spectromind {

using nlohmann::json;
namespace fs = std::filesystem;

void DatasetManifest::validate() const {
    if (subject_ids.empty()) throw ConfigError("manifest: subject_ids empty");
    if (class_names.empty()) throw ConfigError("manifest: class_names empty");
    std::set<std::string> uniq(class_names.begin(), class_names.end());
    if (uniq.size() != class_names.size())
        throw ConfigError("manifest: class_names contains duplicates");
    if (sampling_rate_hz == 0 || trial_length_samples == 0 || channel_count == 0)
        throw ConfigError("manifest: geometry fields must be positive");
}

bool Trial::all_finite() const {
    for (double v : data)
        if (!std::isfinite(v)) return false;
    return true;
}

// ---------------------------------------------------------------------------
// manifest.json

static DatasetManifest manifest_from_json(const json& j) {
    DatasetManifest m;
    try {
        m.subject_ids = j.at("subject_ids").get<std::vector<std::string>>();
        m.class_names = j.at("class_names").get<std::vector<std::string>>();
        m.sampling_rate_hz = j.at("sampling_rate_hz").get<std::uint32_t>();
        m.trial_length_samples = j.at("trial_length_samples").get<std::uint32_t>();
        m.channel_count = j.at("channel_count").get<std::uint32_t>();
    } catch (const json::exception& e) {
        throw DataError(std::string("manifest.json: ") + e.what());
    }
    m.validate();
    return m;
}

static json manifest_to_json(const DatasetManifest& m) {
    return json{{"subject_ids", m.subject_ids},
                {"class_names", m.class_names},
                {"sampling_rate_hz", m.sampling_rate_hz},
                {"trial_length_samples", m.trial_length_samples},
                {"channel_count", m.channel_count}};
}

// ---------------------------------------------------------------------------
// trials/<trial_id>.eegt : "EEGT" u32 channels u32 samples u32 reserved + f32 rows

static constexpr char kEegtMagic[4] = {'E', 'E', 'G', 'T'};

static void write_eegt(const fs::path& path, const Trial& t) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw DataError("cannot write " + path.string());
    f.write(kEegtMagic, 4);
    io::write_u32le(f, std::uint32_t(t.channels));
    io::write_u32le(f, std::uint32_t(t.samples));
    io::write_u32le(f, 0u);
    std::vector<float> row(t.samples);
    for (std::size_t c = 0; c < t.channels; ++c) {
        const double* src = t.channel(c);
        for (std::size_t i = 0; i < t.samples; ++i) row[i] = static_cast<float>(src[i]);
        io::write_f32_block(f, row.data(), row.size());
    }
    if (!f) throw DataError("write failed for " + path.string());
}

static void read_eegt_payload(const fs::path& path, Trial& t) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw DataError("missing trial file " + path.string());
    char magic[4];
    f.read(magic, 4);
    if (!f || std::memcmp(magic, kEegtMagic, 4) != 0)
        throw DataError("bad magic in " + path.string());
    t.channels = io::read_u32le(f);
    t.samples = io::read_u32le(f);
    (void)io::read_u32le(f);  // reserved
    if (!f) throw DataError("truncated header in " + path.string());
    t.data.resize(t.channels * t.samples);
    std::vector<float> row(t.samples);
    for (std::size_t c = 0; c < t.channels; ++c) {
        io::read_f32_block(f, row.data(), row.size(), path.string());
        double* dst = t.channel(c);
        for (std::size_t i = 0; i < t.samples; ++i) dst[i] = row[i];
    }
}

// ---------------------------------------------------------------------------

std::uint64_t dataset_content_hash(const Dataset& ds) {
    io::Fnv1a h;
    h.update_str(manifest_to_json(ds.manifest).dump());
    // order-independent over trials: sort ids, hash records in that order
    std::vector<std::size_t> order(ds.trials.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return ds.trials[a].trial_id < ds.trials[b].trial_id;
    });
    for (std::size_t i : order) {
        const Trial& t = ds.trials[i];
        h.update_str(t.trial_id);
        h.update_str(t.subject_id);
        h.update_str(t.image_id);
        h.update_pod(t.label_index);
        for (double v : t.data) {
            const float fv = static_cast<float>(v);  // hash the storage representation
            h.update_pod(fv);
        }
    }
    return h.digest();
}

Dataset import_dataset(const fs::path& root) {
    const fs::path manifest_path = root / "manifest.json";
    if (!fs::exists(manifest_path))
        throw DataError("format error: missing manifest.json under " + root.string());
    Dataset ds;
    ds.manifest = manifest_from_json(json::parse(io::read_text_file(manifest_path)));

    const fs::path labels_path = root / "labels.jsonl";
    if (!fs::exists(labels_path))
        throw DataError("format error: missing labels.jsonl under " + root.string());
    std::istringstream lines(io::read_text_file(labels_path));
    std::string line;
    std::set<std::string> seen_ids;
    std::size_t line_no = 0;
    while (std::getline(lines, line)) {
        ++line_no;
        if (line.empty()) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::exception& e) {
            throw DataError("labels.jsonl line " + std::to_string(line_no) + ": " + e.what());
        }
        Trial t;
        t.trial_id = j.at("trial_id").get<std::string>();
        t.subject_id = j.at("subject_id").get<std::string>();
        t.label_index = j.at("label_index").get<int>();
        t.image_id = j.at("image_id").get<std::string>();
        if (!seen_ids.insert(t.trial_id).second)
            throw DataError("duplicate trial_id " + t.trial_id + " in labels.jsonl");
        if (t.label_index < 0 || std::size_t(t.label_index) >= ds.manifest.num_classes())
            throw DataError("trial " + t.trial_id + ": label_index out of range");
        if (std::find(ds.manifest.subject_ids.begin(), ds.manifest.subject_ids.end(),
                      t.subject_id) == ds.manifest.subject_ids.end())
            throw DataError("trial " + t.trial_id + ": unknown subject_id " + t.subject_id);
        ds.trials.push_back(std::move(t));
    }

    for (Trial& t : ds.trials) {
        read_eegt_payload(root / "trials" / (t.trial_id + ".eegt"), t);
        if (t.channels != ds.manifest.channel_count || t.samples != ds.manifest.trial_length_samples)
            throw DataError("trial " + t.trial_id + ": dimension mismatch (got " +
                            std::to_string(t.channels) + "x" + std::to_string(t.samples) +
                            ", manifest says " + std::to_string(ds.manifest.channel_count) + "x" +
                            std::to_string(ds.manifest.trial_length_samples) + ")");
        if (!t.all_finite()) throw DataError("trial " + t.trial_id + ": non-finite sample values");
    }
    ds.content_hash = dataset_content_hash(ds);
    return ds;
}

void write_dataset(const fs::path& root, const Dataset& ds) {
    fs::create_directories(root / "trials");
    io::write_text_file(root / "manifest.json", manifest_to_json(ds.manifest).dump(2) + "\n");
    std::ostringstream labels;
    for (const Trial& t : ds.trials) {
        labels << json{{"trial_id", t.trial_id},
                       {"subject_id", t.subject_id},
                       {"label_index", t.label_index},
                       {"image_id", t.image_id}}
                      .dump()
               << "\n";
        write_eegt(root / "trials" / (t.trial_id + ".eegt"), t);
    }
    io::write_text_file(root / "labels.jsonl", labels.str());
}

// ---------------------------------------------------------------------------
// synthetic generation

static std::string zero_pad(std::size_t v, int width) {
    std::string s = std::to_string(v);
    while (int(s.size()) < width) s.insert(s.begin(), '0');
    return s;
}

Dataset generate_synthetic(const DatasetManifest& manifest,
                           const std::vector<ClassSignature>& class_signatures,
                           std::size_t trials_per_class, double noise_std, std::uint64_t seed) {
    manifest.validate();
    if (class_signatures.size() != manifest.num_classes())
        throw ConfigError("generate_synthetic: need one signature per class");
    if (noise_std < 0) throw ConfigError("generate_synthetic: noise_std must be >= 0");
    const double nyquist = manifest.sampling_rate_hz / 2.0;
    for (std::size_t k = 0; k < class_signatures.size(); ++k)
        for (const SignatureComponent& c : class_signatures[k]) {
            if (c.freq_hz <= 0 || c.freq_hz >= nyquist)
                throw ConfigError("signature for class " + std::to_string(k) +
                                  ": frequency must lie in (0, fs/2)");
            if (c.channel >= int(manifest.channel_count))
                throw ConfigError("signature for class " + std::to_string(k) +
                                  ": channel index out of range");
        }

    const std::size_t n_subj = manifest.subject_ids.size();
    const std::size_t n_cls = manifest.num_classes();
    const std::size_t C = manifest.channel_count;
    const std::size_t N = manifest.trial_length_samples;
    const double fs = manifest.sampling_rate_hz;

    // Phases are fixed per (subject, class, component, channel); trials of one
    // subject-class cell differ by noise only, so per-trial class structure is
    // stable enough for the linear baselines to have signal to find.
    std::vector<std::vector<double>> phases(n_subj * n_cls);
    for (std::size_t s = 0; s < n_subj; ++s)
        for (std::size_t k = 0; k < n_cls; ++k) {
            Rng rng(derive_seed(seed, (s * n_cls + k) * 2 + 1));
            std::vector<double>& ph = phases[s * n_cls + k];
            ph.resize(class_signatures[k].size() * C);
            for (double& p : ph) p = rng.uniform(0.0, 2.0 * 3.14159265358979323846);
        }

    Dataset ds;
    ds.manifest = manifest;
    ds.trials.resize(n_subj * n_cls * trials_per_class);

    const std::ptrdiff_t total = std::ptrdiff_t(ds.trials.size());
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t idx = 0; idx < total; ++idx) {
        const std::size_t s = std::size_t(idx) / (n_cls * trials_per_class);
        const std::size_t rem = std::size_t(idx) % (n_cls * trials_per_class);
        const std::size_t k = rem / trials_per_class;
        const std::size_t t = rem % trials_per_class;

        Trial& tr = ds.trials[std::size_t(idx)];
        tr.subject_id = manifest.subject_ids[s];
        tr.label_index = int(k);
        tr.image_id = "img_" + zero_pad(k, 2) + "_" + zero_pad(t, 3);
        tr.trial_id = manifest.subject_ids[s] + "_" + zero_pad(k, 2) + "_" + zero_pad(t, 3);
        tr.channels = C;
        tr.samples = N;
        tr.data.assign(C * N, 0.0);

        const ClassSignature& sig = class_signatures[k];
        const std::vector<double>& ph = phases[s * n_cls + k];
        for (std::size_t ci = 0; ci < sig.size(); ++ci) {
            const SignatureComponent& comp = sig[ci];
            const double w = 2.0 * 3.14159265358979323846 * comp.freq_hz / fs;
            const std::size_t c_lo = comp.channel < 0 ? 0 : std::size_t(comp.channel);
            const std::size_t c_hi = comp.channel < 0 ? C : std::size_t(comp.channel) + 1;
            for (std::size_t c = c_lo; c < c_hi; ++c) {
                double* dst = tr.channel(c);
                const double phase = ph[ci * C + c];
                for (std::size_t n = 0; n < N; ++n)
                    dst[n] += comp.amplitude * std::sin(w * double(n) + phase);
            }
        }
        if (noise_std > 0) {
            Rng noise(derive_seed(seed, 0x10000000ULL + std::uint64_t(idx)));
            for (double& v : tr.data) v += noise_std * noise.normal();
        }
    }
    ds.content_hash = dataset_content_hash(ds);
    return ds;
}

std::vector<ClassSignature> make_channel_coded_signatures(std::size_t num_classes,
                                                          std::size_t channels,
                                                          const std::vector<double>& freq_alphabet,
                                                          double amplitude) {
    if (freq_alphabet.size() < 2) throw ConfigError("freq_alphabet needs at least 2 entries");
    const std::size_t A = freq_alphabet.size();
    // greedy code assignment maximizing pairwise Hamming distance, fixed seed
    Rng rng(0x5eedc0deULL);
    std::vector<std::vector<std::size_t>> codes;
    std::size_t attempts = 0;
    std::size_t min_dist = std::max<std::size_t>(1, channels / 2);
    while (codes.size() < num_classes) {
        std::vector<std::size_t> cand(channels);
        for (std::size_t c = 0; c < channels; ++c)
            cand[c] = std::size_t(rng.next_u64() % A);
        bool ok = true;
        for (const auto& code : codes) {
            std::size_t d = 0;
            for (std::size_t c = 0; c < channels; ++c) d += (code[c] != cand[c]);
            if (d < min_dist) {
                ok = false;
                break;
            }
        }
        if (ok) codes.push_back(std::move(cand));
        if (++attempts > 20000 * num_classes) {
            if (min_dist == 1)
                throw ConfigError("cannot build distinct channel codes; alphabet too small");
            --min_dist;  // relax and keep going
            attempts = 0;
        }
    }
    std::vector<ClassSignature> sigs(num_classes);
    for (std::size_t k = 0; k < num_classes; ++k)
        for (std::size_t c = 0; c < channels; ++c)
            sigs[k].push_back({freq_alphabet[codes[k][c]], amplitude, int(c)});
    return sigs;
}

// ---------------------------------------------------------------------------
// stratified split

Splits split_dataset(const Dataset& ds, const SplitRatios& ratios, std::uint64_t seed) {
    const double parts[3] = {ratios.train, ratios.val, ratios.test};
    double sum = 0;
    for (double r : parts) {
        if (r <= 0) throw ConfigError("split ratios must be positive");
        sum += r;
    }
    if (std::abs(sum - 1.0) > 1e-9) throw ConfigError("split ratios must sum to 1");

    std::map<std::pair<std::string, int>, std::vector<std::size_t>> cells;
    for (std::size_t i = 0; i < ds.trials.size(); ++i)
        cells[{ds.trials[i].subject_id, ds.trials[i].label_index}].push_back(i);

    Splits out;
    out.dataset_hash = ds.content_hash;
    out.seed = seed;
    Rng rng(seed);
    for (auto& [key, idxs] : cells) {  // std::map iteration: deterministic order
        if (idxs.size() < 3)
            throw ConfigError("stratification error: cell (" + key.first + ", class " +
                              std::to_string(key.second) + ") has " +
                              std::to_string(idxs.size()) + " trials, fewer than 3 partitions");
        std::sort(idxs.begin(), idxs.end(), [&](std::size_t a, std::size_t b) {
            return ds.trials[a].trial_id < ds.trials[b].trial_id;
        });
        rng.shuffle(idxs);
        const std::size_t n = idxs.size();
        // largest-remainder apportionment; remainder goes to the largest
        // fractional parts, ties to the earlier partition
        std::size_t counts[3];
        double fracs[3];
        std::size_t assigned = 0;
        for (int p = 0; p < 3; ++p) {
            const double exact = double(n) * parts[p];
            counts[p] = std::size_t(exact);
            fracs[p] = exact - double(counts[p]);
            assigned += counts[p];
        }
        while (assigned < n) {
            int best = 0;
            for (int p = 1; p < 3; ++p)
                if (fracs[p] > fracs[best]) best = p;
            ++counts[best];
            fracs[best] = -1;
            ++assigned;
        }
        std::size_t pos = 0;
        for (std::size_t j = 0; j < counts[0]; ++j) out.train.push_back(idxs[pos++]);
        for (std::size_t j = 0; j < counts[1]; ++j) out.val.push_back(idxs[pos++]);
        for (std::size_t j = 0; j < counts[2]; ++j) out.test.push_back(idxs[pos++]);
    }
    io::Fnv1a h;
    h.update_pod(ds.content_hash);
    h.update_pod(parts);
    h.update_pod(seed);
    out.provenance_hash = h.digest();
    return out;
}

// ---------------------------------------------------------------------------
// teacher.jsonl

std::map<std::string, TeacherOutput> load_teacher_outputs(const fs::path& path) {
    if (!fs::exists(path)) throw DataError("missing teacher file " + path.string());
    std::istringstream lines(io::read_text_file(path));
    std::map<std::string, TeacherOutput> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(lines, line)) {
        ++line_no;
        if (line.empty()) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::exception& e) {
            throw DataError("teacher jsonl line " + std::to_string(line_no) + ": " + e.what());
        }
        TeacherOutput t;
        t.image_id = j.at("image_id").get<std::string>();
        const std::string kind = j.at("kind").get<std::string>();
        if (kind == "logits")
            t.kind = TeacherOutput::Kind::logits;
        else if (kind == "probabilities")
            t.kind = TeacherOutput::Kind::probabilities;
        else
            throw DataError("teacher row " + t.image_id + ": unknown kind '" + kind + "'");
        t.values = j.at("values").get<std::vector<double>>();
        for (double v : t.values)
            if (!std::isfinite(v))
                throw DataError("teacher row " + t.image_id + ": non-finite value");
        if (t.kind == TeacherOutput::Kind::probabilities) {
            double s = 0;
            for (double v : t.values) {
                if (v < 0) throw DataError("teacher row " + t.image_id + ": negative probability");
                s += v;
            }
            if (std::abs(s - 1.0) > 1e-6)
                throw DataError("teacher row " + t.image_id + ": probabilities sum to " +
                                std::to_string(s) + ", outside 1 +/- 1e-6");
        }
        if (!out.emplace(t.image_id, std::move(t)).second)
            throw DataError("duplicate teacher row for image_id " + j.at("image_id").get<std::string>());
    }
    return out;
}

void save_teacher_outputs(const fs::path& path, const std::vector<TeacherOutput>& rows) {
    std::ostringstream os;
    for (const TeacherOutput& t : rows)
        os << json{{"image_id", t.image_id},
                   {"kind", t.kind == TeacherOutput::Kind::logits ? "logits" : "probabilities"},
                   {"values", t.values}}
                  .dump()
           << "\n";
    io::write_text_file(path, os.str());
}

void validate_teacher_coverage(const Dataset& ds,
                               const std::map<std::string, TeacherOutput>& teacher) {
    std::set<std::string> missing;
    for (const Trial& t : ds.trials)
        if (!teacher.count(t.image_id)) missing.insert(t.image_id);
    if (!missing.empty()) {
        std::ostringstream os;
        os << missing.size() << " image_ids lack teacher rows:";
        std::size_t shown = 0;
        for (const std::string& id : missing) {
            os << " " << id;
            if (++shown == 10) {
                os << " ...";
                break;
            }
        }
        throw DataError(os.str());
    }
}

std::vector<TeacherOutput> make_onehot_teacher(const Dataset& ds) {
    std::map<std::string, int> by_image;
    for (const Trial& t : ds.trials) by_image[t.image_id] = t.label_index;
    std::vector<TeacherOutput> rows;
    rows.reserve(by_image.size());
    for (const auto& [img, label] : by_image) {
        TeacherOutput t;
        t.image_id = img;
        t.kind = TeacherOutput::Kind::probabilities;
        t.values.assign(ds.manifest.num_classes(), 0.0);
        t.values[std::size_t(label)] = 1.0;
        rows.push_back(std::move(t));
    }
    return rows;
}

// ---------------------------------------------------------------------------
// embeddings.bin : "EMBD" u32 count u32 dim + f32 rows + trailing JSON id table

static constexpr char kEmbdMagic[4] = {'E', 'M', 'B', 'D'};

std::vector<EmbeddingRecord> load_embeddings(const fs::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw DataError("missing embeddings file " + path.string());
    char magic[4];
    f.read(magic, 4);
    if (!f || std::memcmp(magic, kEmbdMagic, 4) != 0)
        throw DataError("bad magic in " + path.string());
    const std::uint32_t count = io::read_u32le(f);
    const std::uint32_t dim = io::read_u32le(f);
    std::vector<EmbeddingRecord> recs(count);
    std::vector<float> row(dim);
    for (std::uint32_t i = 0; i < count; ++i) {
        io::read_f32_block(f, row.data(), dim, path.string());
        recs[i].embedding.assign(row.begin(), row.end());
    }
    std::ostringstream tail;
    tail << f.rdbuf();
    json j;
    try {
        j = json::parse(tail.str());
    } catch (const json::exception& e) {
        throw DataError("embeddings id table: " + std::string(e.what()));
    }
    const auto ids = j.at("ids").get<std::vector<std::string>>();
    const auto labels = j.at("labels").get<std::vector<int>>();
    if (ids.size() != count || labels.size() != count)
        throw DataError("embeddings id table length mismatch");
    for (std::uint32_t i = 0; i < count; ++i) {
        recs[i].image_id = ids[i];
        recs[i].label_index = labels[i];
    }
    return recs;
}

void save_embeddings(const fs::path& path, const std::vector<EmbeddingRecord>& recs) {
    if (recs.empty()) throw ConfigError("save_embeddings: empty record list");
    const std::size_t dim = recs[0].embedding.size();
    for (const auto& r : recs)
        if (r.embedding.size() != dim)
            throw DataError("save_embeddings: inconsistent dimensions");
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw DataError("cannot write " + path.string());
    f.write(kEmbdMagic, 4);
    io::write_u32le(f, std::uint32_t(recs.size()));
    io::write_u32le(f, std::uint32_t(dim));
    std::vector<float> row(dim);
    json ids = json::array(), labels = json::array();
    for (const auto& r : recs) {
        for (std::size_t i = 0; i < dim; ++i) row[i] = float(r.embedding[i]);
        io::write_f32_block(f, row.data(), dim);
        ids.push_back(r.image_id);
        labels.push_back(r.label_index);
    }
    f << json{{"ids", ids}, {"labels", labels}}.dump();
}

}  // namespace spectromind
