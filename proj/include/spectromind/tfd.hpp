#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "spectromind/common.hpp"
#include "spectromind/dataset.hpp"
#include "spectromind/tensor.hpp"

namespace spectromind::tfd {

enum class TfdKind : std::uint8_t { stft = 0, wavelet = 1, raw2d = 2 };

std::string kind_name(TfdKind k);
TfdKind kind_from_name(const std::string& s);

// [channels x rows x cols], float32. rows = frequency bins (stft), subbands
// (wavelet) or electrodes (raw2d).
struct TfdImage {
    TfdKind kind = TfdKind::stft;
    std::size_t channels = 0, rows = 0, cols = 0;
    std::vector<float> data;
    double hz_per_row = 0;   // 0 when rows are not uniformly spaced in frequency
    double sec_per_col = 0;

    float& at(std::size_t c, std::size_t r, std::size_t col) {
        return data[(c * rows + r) * cols + col];
    }
    const float& at(std::size_t c, std::size_t r, std::size_t col) const {
        return data[(c * rows + r) * cols + col];
    }
    bool all_finite() const;
};

struct StftConfig {
    double window_ms = 40.0;
    double hop_ms = 20.0;
    std::size_t nfft = 64;
    enum class Window { hann, rectangular } window_fn = Window::hann;
    enum class Scaling { log1p_magnitude, magnitude } scaling = Scaling::log1p_magnitude;

    std::size_t window_samples(double fs) const;
    std::size_t hop_samples(double fs) const;
    void validate(double fs) const;
};

TfdImage stft_spectrogram(const Trial& trial, double sampling_rate_hz, const StftConfig& cfg);

// multi-level db4 analysis; details[0] is the finest (highest-frequency) band
struct DwtBands {
    std::vector<std::vector<double>> details;
    std::vector<double> approx;
    std::vector<std::size_t> input_lengths;  // pre-pad length at each level
};

DwtBands dwt_db4(const std::vector<double>& x, std::size_t levels);
std::vector<double> idwt_db4(const DwtBands& bands);

TfdImage wavelet_scalogram(const Trial& trial, std::size_t levels, std::size_t width);

TfdImage raw2d(const Trial& trial);

// per-channel z-score over the whole image; constant channels become zero
void normalize_image(TfdImage& img);

void write_tfdi(const std::filesystem::path& path, const TfdImage& img);
TfdImage read_tfdi(const std::filesystem::path& path);

}  // namespace spectromind::tfd
