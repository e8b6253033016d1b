#include "spectromind/dsp.hpp"

#include <algorithm>
#include <cmath>

namespace spectromind::dsp {

namespace {

constexpr double kPi = 3.14159265358979323846;
using cplx = std::complex<double>;

cplx bilinear(cplx s, double fs2) { return (fs2 + s) / (fs2 - s); }

// section from a digital pole pair (conjugate or two reals) and a fixed
// numerator pattern; gain applied later
Biquad section_from_poles(cplx p1, cplx p2, double b0, double b1, double b2) {
    Biquad s;
    s.b0 = b0;
    s.b1 = b1;
    s.b2 = b2;
    s.a1 = -(p1 + p2).real();
    s.a2 = (p1 * p2).real();
    return s;
}

}  // namespace

void FilterSpec::validate() const {
    if (sampling_rate_hz <= 0) throw ConfigError("filter: sampling rate must be positive");
    if (order < 1) throw ConfigError("filter: order must be >= 1");
    if (!(0 < low_hz && low_hz < high_hz && high_hz < sampling_rate_hz / 2))
        throw ConfigError("filter: need 0 < low < high < fs/2");
}

bool Biquad::stable() const {
    // stability triangle for z^2 + a1 z + a2
    return std::abs(a2) < 1.0 && std::abs(a1) < 1.0 + a2;
}

bool BiquadCascade::stable() const {
    for (const Biquad& s : sections)
        if (!s.stable()) return false;
    return true;
}

std::complex<double> BiquadCascade::response(double freq_hz) const {
    const double w = 2.0 * kPi * freq_hz / sampling_rate_hz;
    const cplx z1 = std::exp(cplx(0, -w));
    const cplx z2 = z1 * z1;
    cplx h(1, 0);
    for (const Biquad& s : sections)
        h *= (s.b0 + s.b1 * z1 + s.b2 * z2) / (1.0 + s.a1 * z1 + s.a2 * z2);
    return h;
}

double BiquadCascade::magnitude(double freq_hz) const { return std::abs(response(freq_hz)); }

std::size_t BiquadCascade::group_delay_bound() const {
    double bound = 0;
    for (const Biquad& s : sections) {
        // max pole radius of z^2 + a1 z + a2
        const double disc = s.a1 * s.a1 - 4 * s.a2;
        double r;
        if (disc >= 0) {
            const double r1 = std::abs((-s.a1 + std::sqrt(disc)) / 2);
            const double r2 = std::abs((-s.a1 - std::sqrt(disc)) / 2);
            r = std::max(r1, r2);
        } else {
            r = std::sqrt(s.a2);
        }
        r = std::min(r, 1.0 - 1e-9);
        bound += 2.0 * r / (1.0 - r);
    }
    return std::size_t(std::ceil(bound)) + 1;
}

BiquadCascade design_filter(const FilterSpec& spec) {
    spec.validate();
    const int N = spec.order;
    const double fs = spec.sampling_rate_hz;
    const double fs2 = 2.0 * fs;

    // pre-warped band edges
    const double w1 = fs2 * std::tan(kPi * spec.low_hz / fs);
    const double w2 = fs2 * std::tan(kPi * spec.high_hz / fs);
    const double bw = w2 - w1;
    const double w0 = std::sqrt(w1 * w2);

    // Butterworth prototype poles, left half-plane
    std::vector<cplx> proto;
    for (int k = 0; k < N; ++k) {
        const double theta = kPi * (2.0 * k + N + 1.0) / (2.0 * N);
        proto.emplace_back(std::cos(theta), std::sin(theta));
    }

    // Band transform of each prototype pole gives a quadratic in s; collect
    // digital pole pairs so that every section is conjugate (real coefficients).
    std::vector<std::pair<cplx, cplx>> pole_pairs;
    auto add_from_proto = [&](cplx p) {
        cplx s1, s2;
        if (spec.kind == FilterSpec::Kind::bandpass) {
            const cplx bp = bw * p;
            const cplx d = std::sqrt(bp * bp - 4.0 * w0 * w0);
            s1 = (bp + d) / 2.0;
            s2 = (bp - d) / 2.0;
        } else {
            const cplx bp = bw / p;
            const cplx d = std::sqrt(bp * bp - 4.0 * w0 * w0);
            s1 = (bp + d) / 2.0;
            s2 = (bp - d) / 2.0;
        }
        const cplx z1 = bilinear(s1, fs2);
        const cplx z2 = bilinear(s2, fs2);
        if (std::abs(p.imag()) < 1e-12) {
            // real prototype pole: the two transformed poles pair with each other
            pole_pairs.emplace_back(z1, z2);
        } else {
            // complex prototype pole: pair each transformed pole with its own
            // conjugate (contributed by the conjugate prototype pole)
            pole_pairs.emplace_back(z1, std::conj(z1));
            pole_pairs.emplace_back(z2, std::conj(z2));
        }
    };
    for (const cplx& p : proto)
        if (p.imag() > 1e-12 || std::abs(p.imag()) < 1e-12) add_from_proto(p);

    BiquadCascade cascade;
    cascade.sampling_rate_hz = fs;
    if (spec.kind == FilterSpec::Kind::bandpass) {
        // N zeros at z=+1 and N at z=-1: give each section (z-1)(z+1) -> (1, 0, -1)
        for (const auto& [p1, p2] : pole_pairs)
            cascade.sections.push_back(section_from_poles(p1, p2, 1.0, 0.0, -1.0));
    } else {
        // zero pairs at e^{+-j theta0}
        const double theta0 = 2.0 * std::atan(w0 / fs2);
        const double b1 = -2.0 * std::cos(theta0);
        for (const auto& [p1, p2] : pole_pairs)
            cascade.sections.push_back(section_from_poles(p1, p2, 1.0, b1, 1.0));
    }

    if (!cascade.stable()) throw ConfigError("filter design unstable (degenerate band)");

    // normalize overall gain at a reference frequency inside the passband
    double ref_hz;
    if (spec.kind == FilterSpec::Kind::bandpass) {
        const double theta_c = 2.0 * std::atan(w0 / fs2);
        ref_hz = theta_c * fs / (2.0 * kPi);
    } else {
        ref_hz = 0.0;  // bandstop passes DC
    }
    const double g = cascade.magnitude(ref_hz);
    if (!(g > 0) || !std::isfinite(g)) throw ConfigError("filter design degenerate gain");
    const double per_section = std::pow(1.0 / g, 1.0 / double(cascade.sections.size()));
    for (Biquad& s : cascade.sections) {
        s.b0 *= per_section;
        s.b1 *= per_section;
        s.b2 *= per_section;
    }
    return cascade;
}

// ---------------------------------------------------------------------------
// filtering

namespace {

// transposed direct form II, one section, explicit initial state
void run_section(const Biquad& s, const double* x, double* y, std::size_t n, double z1,
                 double z2) {
    for (std::size_t i = 0; i < n; ++i) {
        const double xi = x[i];
        const double yi = s.b0 * xi + z1;
        z1 = s.b1 * xi - s.a1 * yi + z2;
        z2 = s.b2 * xi - s.a2 * yi;
        y[i] = yi;
    }
}

// steady-state state for a unit-step input (scaled by the caller)
void section_step_state(const Biquad& s, double& z1, double& z2) {
    const double den = 1.0 + s.a1 + s.a2;
    const double k = (s.b0 + s.b1 + s.b2) / den;
    z1 = k - s.b0;
    z2 = s.b2 - s.a2 * k;
}

void cascade_with_ic(const BiquadCascade& f, std::vector<double>& buf) {
    double x0 = buf.empty() ? 0.0 : buf[0];
    for (const Biquad& s : f.sections) {
        double z1, z2;
        section_step_state(s, z1, z2);
        run_section(s, buf.data(), buf.data(), buf.size(), z1 * x0, z2 * x0);
        const double k = (s.b0 + s.b1 + s.b2) / (1.0 + s.a1 + s.a2);
        x0 *= k;
    }
}

}  // namespace

std::vector<double> filter_forward(const BiquadCascade& f, const std::vector<double>& x) {
    std::vector<double> y = x;
    for (const Biquad& s : f.sections) run_section(s, y.data(), y.data(), y.size(), 0.0, 0.0);
    return y;
}

std::vector<double> filter_zero_phase(const BiquadCascade& f, const std::vector<double>& x) {
    const std::size_t n = x.size();
    const std::size_t min_len = 3 * (2 * f.sections.size() + 1);
    if (n <= min_len)
        throw ConfigError("filter_zero_phase: signal length " + std::to_string(n) +
                          " too short for edge padding (need > " + std::to_string(min_len) + ")");
    const std::size_t pad = std::min(n - 1, 3 * f.group_delay_bound());

    // odd reflection about the end samples
    std::vector<double> ext(n + 2 * pad);
    for (std::size_t i = 0; i < pad; ++i) ext[i] = 2.0 * x[0] - x[pad - i];
    std::copy(x.begin(), x.end(), ext.begin() + std::ptrdiff_t(pad));
    for (std::size_t i = 0; i < pad; ++i) ext[pad + n + i] = 2.0 * x[n - 1] - x[n - 2 - i];

    cascade_with_ic(f, ext);
    std::reverse(ext.begin(), ext.end());
    cascade_with_ic(f, ext);
    std::reverse(ext.begin(), ext.end());

    return std::vector<double>(ext.begin() + std::ptrdiff_t(pad),
                               ext.begin() + std::ptrdiff_t(pad + n));
}

// ---------------------------------------------------------------------------

StandardizeResult standardize(Trial& trial) {
    StandardizeResult res;
    const std::size_t N = trial.samples;
    if (N == 0) return res;
    for (std::size_t c = 0; c < trial.channels; ++c) {
        double* ch = trial.channel(c);
        double mean = 0;
        for (std::size_t i = 0; i < N; ++i) mean += ch[i];
        mean /= double(N);
        double var = 0;
        for (std::size_t i = 0; i < N; ++i) var += (ch[i] - mean) * (ch[i] - mean);
        var /= double(N);
        const double sd = std::sqrt(var);
        if (sd < 1e-12) {
            std::fill(ch, ch + N, 0.0);
            res.constant_channels.push_back(c);
        } else {
            for (std::size_t i = 0; i < N; ++i) ch[i] = (ch[i] - mean) / sd;
        }
    }
    return res;
}

PreprocessChain make_preprocess_chain(const PreprocessConfig& cfg, double fs) {
    FilterSpec notch{FilterSpec::Kind::notch_bandstop, cfg.notch_low_hz, cfg.notch_high_hz,
                     cfg.order, fs};
    FilterSpec band{FilterSpec::Kind::bandpass, cfg.band_low_hz, cfg.band_high_hz, cfg.order, fs};
    return PreprocessChain{design_filter(notch), design_filter(band)};
}

StandardizeResult preprocess(Trial& trial, const PreprocessChain& chain) {
    // validate once, outside the parallel region
    const std::size_t min_len =
        3 * (2 * std::max(chain.notch.sections.size(), chain.bandpass.sections.size()) + 1);
    if (trial.samples <= min_len)
        throw ConfigError("preprocess: trial " + trial.trial_id + " too short (" +
                          std::to_string(trial.samples) + " samples)");
    const std::ptrdiff_t C = std::ptrdiff_t(trial.channels);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t c = 0; c < C; ++c) {
        std::vector<double> ch(trial.channel(std::size_t(c)),
                               trial.channel(std::size_t(c)) + trial.samples);
        ch = filter_zero_phase(chain.notch, ch);
        ch = filter_zero_phase(chain.bandpass, ch);
        std::copy(ch.begin(), ch.end(), trial.channel(std::size_t(c)));
    }
    return standardize(trial);
}

}  // namespace spectromind::dsp
