#include "spectromind/tfd.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>

#include "spectromind/io_util.hpp"
#include "spectromind/kernels.hpp"

namespace spectromind::tfd {

namespace {

constexpr double kPi = 3.14159265358979323846;

// Daubechies db4 scaling filter (8 taps, orthonormal: sum h^2 = 1)
constexpr double kDb4[8] = {0.230377813308855230,  0.714846570552541500,
                            0.630880767929590400,  -0.027983769416983850,
                            -0.187034811718881140, 0.030841381835986965,
                            0.032883011666982945,  -0.010597401784997278};
constexpr std::size_t kDb4Len = 8;

double db4_high(std::size_t m) {
    // quadrature mirror: g[m] = (-1)^m h[L-1-m]
    const double h = kDb4[kDb4Len - 1 - m];
    return (m % 2 == 0) ? h : -h;
}

}  // namespace

std::string kind_name(TfdKind k) {
    switch (k) {
        case TfdKind::stft: return "stft";
        case TfdKind::wavelet: return "wavelet";
        case TfdKind::raw2d: return "raw2d";
    }
    return "?";
}

TfdKind kind_from_name(const std::string& s) {
    if (s == "stft") return TfdKind::stft;
    if (s == "wavelet") return TfdKind::wavelet;
    if (s == "raw2d") return TfdKind::raw2d;
    throw ConfigError("unknown representation kind '" + s + "'");
}

bool TfdImage::all_finite() const {
    for (float v : data)
        if (!std::isfinite(v)) return false;
    return true;
}

std::size_t StftConfig::window_samples(double fs) const {
    return std::size_t(std::llround(window_ms * fs / 1000.0));
}
std::size_t StftConfig::hop_samples(double fs) const {
    return std::size_t(std::llround(hop_ms * fs / 1000.0));
}

void StftConfig::validate(double fs) const {
    if (fs <= 0) throw ConfigError("stft: sampling rate must be positive");
    if (hop_ms > window_ms) throw ConfigError("stft: hop must not exceed window");
    const std::size_t w = window_samples(fs), h = hop_samples(fs);
    if (w < 1 || h < 1) throw ConfigError("stft: window/hop shorter than one sample");
    if (nfft < w) throw ConfigError("stft: nfft must be >= window length in samples");
}

TfdImage stft_spectrogram(const Trial& trial, double fs, const StftConfig& cfg) {
    cfg.validate(fs);
    const std::size_t W = cfg.window_samples(fs);
    const std::size_t H = cfg.hop_samples(fs);
    if (trial.samples < W)
        throw ConfigError("stft: trial " + trial.trial_id + " shorter than one window");
    const std::size_t frames = (trial.samples - W) / H + 1;
    const std::size_t bins = cfg.nfft / 2 + 1;

    std::vector<double> window(W);
    for (std::size_t n = 0; n < W; ++n)
        window[n] = cfg.window_fn == StftConfig::Window::hann
                        ? 0.5 - 0.5 * std::cos(2.0 * kPi * double(n) / double(W))
                        : 1.0;
    std::vector<double> cos_tab(bins * W), sin_tab(bins * W);
    for (std::size_t k = 0; k < bins; ++k)
        for (std::size_t n = 0; n < W; ++n) {
            const double arg = 2.0 * kPi * double(k) * double(n) / double(cfg.nfft);
            cos_tab[k * W + n] = std::cos(arg);
            sin_tab[k * W + n] = std::sin(arg);
        }

    std::vector<double> mags;
    kernels::stft_magnitudes(trial.data, trial.channels, trial.samples, window, H, frames,
                             cos_tab, sin_tab, bins, mags);

    TfdImage img;
    img.kind = TfdKind::stft;
    img.channels = trial.channels;
    img.rows = bins;
    img.cols = frames;
    img.hz_per_row = fs / double(cfg.nfft);
    img.sec_per_col = double(H) / fs;
    img.data.resize(mags.size());
    const bool log_scale = cfg.scaling == StftConfig::Scaling::log1p_magnitude;
    for (std::size_t i = 0; i < mags.size(); ++i)
        img.data[i] = float(log_scale ? std::log1p(mags[i]) : mags[i]);
    return img;
}

// ---------------------------------------------------------------------------
// db4 discrete wavelet transform, periodized with zero-pad to even length.
// The transform at each level is orthonormal, so energy is conserved exactly
// and the inverse is the transpose.

DwtBands dwt_db4(const std::vector<double>& x, std::size_t levels) {
    if (levels < 1) throw ConfigError("dwt: levels must be >= 1");
    // every level needs at least the filter length after padding
    {
        std::size_t n = x.size();
        for (std::size_t l = 0; l < levels; ++l) {
            if (n + (n % 2) < kDb4Len)
                throw ConfigError("dwt: signal too short for " + std::to_string(levels) +
                                  " levels (level " + std::to_string(l + 1) + " has " +
                                  std::to_string(n) + " samples)");
            n = (n + (n % 2)) / 2;
        }
    }

    DwtBands out;
    std::vector<double> cur = x;
    for (std::size_t l = 0; l < levels; ++l) {
        out.input_lengths.push_back(cur.size());
        if (cur.size() % 2 != 0) cur.push_back(0.0);
        const std::size_t n = cur.size();
        const std::size_t half = n / 2;
        std::vector<double> approx(half), detail(half);
        for (std::size_t k = 0; k < half; ++k) {
            double a = 0, d = 0;
            for (std::size_t m = 0; m < kDb4Len; ++m) {
                const double v = cur[(2 * k + m) % n];
                a += kDb4[m] * v;
                d += db4_high(m) * v;
            }
            approx[k] = a;
            detail[k] = d;
        }
        out.details.push_back(std::move(detail));
        cur = std::move(approx);
    }
    out.approx = std::move(cur);
    return out;
}

std::vector<double> idwt_db4(const DwtBands& bands) {
    if (bands.details.size() != bands.input_lengths.size())
        throw ConfigError("idwt: inconsistent band structure");
    std::vector<double> cur = bands.approx;
    for (std::size_t li = bands.details.size(); li-- > 0;) {
        const std::vector<double>& detail = bands.details[li];
        if (detail.size() != cur.size()) throw ConfigError("idwt: band length mismatch");
        const std::size_t n = 2 * cur.size();
        std::vector<double> rec(n, 0.0);
        for (std::size_t k = 0; k < cur.size(); ++k) {
            for (std::size_t m = 0; m < kDb4Len; ++m) {
                const std::size_t j = (2 * k + m) % n;
                rec[j] += kDb4[m] * cur[k] + db4_high(m) * detail[k];
            }
        }
        rec.resize(bands.input_lengths[li]);  // drop the zero pad
        cur = std::move(rec);
    }
    return cur;
}

TfdImage wavelet_scalogram(const Trial& trial, std::size_t levels, std::size_t width) {
    if (width < 1) throw ConfigError("scalogram: width must be >= 1");
    TfdImage img;
    img.kind = TfdKind::wavelet;
    img.channels = trial.channels;
    img.rows = levels + 1;
    img.cols = width;
    img.sec_per_col = 0;
    img.hz_per_row = 0;  // subband rows are octave-spaced, not linear
    img.data.assign(img.channels * img.rows * img.cols, 0.0f);

    // validate once so the parallel loop cannot throw
    {
        std::vector<double> probe(trial.samples, 0.0);
        dwt_db4(probe, levels);
    }
    const std::ptrdiff_t C = std::ptrdiff_t(trial.channels);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t c = 0; c < C; ++c) {
        std::vector<double> ch(trial.channel(std::size_t(c)),
                               trial.channel(std::size_t(c)) + trial.samples);
        const DwtBands bands = dwt_db4(ch, levels);
        for (std::size_t r = 0; r < img.rows; ++r) {
            const std::vector<double>& band = r < levels ? bands.details[r] : bands.approx;
            for (std::size_t j = 0; j < width; ++j) {
                // nearest-neighbour resample of |coefficients| to `width` columns
                std::size_t src = std::size_t((double(j) + 0.5) * double(band.size()) /
                                              double(width));
                if (src >= band.size()) src = band.size() - 1;
                img.at(std::size_t(c), r, j) = float(std::abs(band[src]));
            }
        }
    }
    return img;
}

TfdImage raw2d(const Trial& trial) {
    TfdImage img;
    img.kind = TfdKind::raw2d;
    img.channels = 1;
    img.rows = trial.channels;
    img.cols = trial.samples;
    img.hz_per_row = 0;
    img.sec_per_col = 1.0;  // one sample per column
    img.data.resize(trial.data.size());
    for (std::size_t i = 0; i < trial.data.size(); ++i) img.data[i] = float(trial.data[i]);
    return img;
}

void normalize_image(TfdImage& img) {
    const std::size_t per_ch = img.rows * img.cols;
    for (std::size_t c = 0; c < img.channels; ++c) {
        float* p = img.data.data() + c * per_ch;
        double mean = 0;
        for (std::size_t i = 0; i < per_ch; ++i) mean += p[i];
        mean /= double(per_ch);
        double var = 0;
        for (std::size_t i = 0; i < per_ch; ++i) var += (p[i] - mean) * (p[i] - mean);
        var /= double(per_ch);
        const double sd = std::sqrt(var);
        if (sd < 1e-12) {
            std::fill(p, p + per_ch, 0.0f);
        } else {
            for (std::size_t i = 0; i < per_ch; ++i) p[i] = float((p[i] - mean) / sd);
        }
    }
}

// ---------------------------------------------------------------------------
// "TFDI" u8 kind u8[3] reserved, u32 channels/rows/cols, f64 axis metadata, f32 payload

static constexpr char kTfdiMagic[4] = {'T', 'F', 'D', 'I'};

void write_tfdi(const std::filesystem::path& path, const TfdImage& img) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw DataError("cannot write " + path.string());
    f.write(kTfdiMagic, 4);
    const unsigned char kind = static_cast<unsigned char>(img.kind);
    const unsigned char zeros[3] = {0, 0, 0};
    f.write(reinterpret_cast<const char*>(&kind), 1);
    f.write(reinterpret_cast<const char*>(zeros), 3);
    io::write_u32le(f, std::uint32_t(img.channels));
    io::write_u32le(f, std::uint32_t(img.rows));
    io::write_u32le(f, std::uint32_t(img.cols));
    f.write(reinterpret_cast<const char*>(&img.hz_per_row), 8);
    f.write(reinterpret_cast<const char*>(&img.sec_per_col), 8);
    io::write_f32_block(f, img.data.data(), img.data.size());
    if (!f) throw DataError("write failed for " + path.string());
}

TfdImage read_tfdi(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw DataError("missing tfd file " + path.string());
    char magic[4];
    f.read(magic, 4);
    if (!f || std::memcmp(magic, kTfdiMagic, 4) != 0)
        throw DataError("bad magic in " + path.string());
    unsigned char kind_and_pad[4];
    f.read(reinterpret_cast<char*>(kind_and_pad), 4);
    TfdImage img;
    if (kind_and_pad[0] > 2) throw DataError("bad kind byte in " + path.string());
    img.kind = static_cast<TfdKind>(kind_and_pad[0]);
    img.channels = io::read_u32le(f);
    img.rows = io::read_u32le(f);
    img.cols = io::read_u32le(f);
    f.read(reinterpret_cast<char*>(&img.hz_per_row), 8);
    f.read(reinterpret_cast<char*>(&img.sec_per_col), 8);
    if (!f) throw DataError("truncated header in " + path.string());
    img.data.resize(img.channels * img.rows * img.cols);
    io::read_f32_block(f, img.data.data(), img.data.size(), path.string());
    return img;
}

}  // namespace spectromind::tfd
