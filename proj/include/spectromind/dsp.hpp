#pragma once

#include <complex>
#include <cstddef>
#include <vector>

#include "spectromind/common.hpp"
#include "spectromind/dataset.hpp"

namespace spectromind::dsp {

struct FilterSpec {
    enum class Kind { notch_bandstop, bandpass };
    Kind kind = Kind::bandpass;
    double low_hz = 14.0;
    double high_hz = 70.0;
    int order = 2;  // Butterworth prototype order; digital filter has 2*order poles
    double sampling_rate_hz = 1000.0;

    void validate() const;
};

struct Biquad {
    double b0 = 0, b1 = 0, b2 = 0;  // numerator
    double a1 = 0, a2 = 0;          // denominator (a0 normalized to 1)
    bool stable() const;            // poles strictly inside the unit circle
};

struct BiquadCascade {
    std::vector<Biquad> sections;
    double sampling_rate_hz = 0;

    bool stable() const;
    std::complex<double> response(double freq_hz) const;  // H(e^jw)
    double magnitude(double freq_hz) const;
    // conservative memory bound from pole radii, in samples
    std::size_t group_delay_bound() const;
};

BiquadCascade design_filter(const FilterSpec& spec);

// single forward pass, zero initial state
std::vector<double> filter_forward(const BiquadCascade& f, const std::vector<double>& x);

// forward-backward pass with odd-reflection padding and steady-state initial
// conditions; output length equals input length
std::vector<double> filter_zero_phase(const BiquadCascade& f, const std::vector<double>& x);

// per-channel z-score over the trial's time axis, population (N) denominator.
// Constant channels become all-zero and are reported back, not fatal.
struct StandardizeResult {
    std::vector<std::size_t> constant_channels;
};
StandardizeResult standardize(Trial& trial);

struct PreprocessConfig {
    double notch_low_hz = 49.0;
    double notch_high_hz = 51.0;
    double band_low_hz = 14.0;
    double band_high_hz = 70.0;
    int order = 2;
};

struct PreprocessChain {
    BiquadCascade notch;
    BiquadCascade bandpass;
};
PreprocessChain make_preprocess_chain(const PreprocessConfig& cfg, double sampling_rate_hz);

// notch -> bandpass -> standardize, in that order
StandardizeResult preprocess(Trial& trial, const PreprocessChain& chain);

}  // namespace spectromind::dsp
