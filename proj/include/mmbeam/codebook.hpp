#pragma once

// Grid-of-beams codebooks on uniform squared planar arrays (USPA) and the
// beam-to-beam spatial cross-correlation matrix.
//
// Array frame: element (m, n) sits at horizontal index m and vertical index n,
// both in [0, N). For azimuth phi (relative to the panel boresight) and
// elevation theta (above the panel broadside plane) the element phase is
//   2*pi*d*(m*sin(phi)*cos(theta) + n*sin(theta)),
// with d the element spacing in wavelengths. A DFT beam is the normalized
// array response at a pair of direction cosines (u, v) taken from a
// half-bin-shifted N-point grid, so every beam of a panel is orthogonal to
// every other beam of the same panel.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "mmbeam/error.hpp"

namespace mmbeam {

inline constexpr double kPi = std::numbers::pi;

inline double deg2rad(double deg) { return deg * kPi / 180.0; }
inline double rad2deg(double rad) { return rad * 180.0 / kPi; }

/// Wraps an angle in degrees into [-180, 180).
inline double wrap_degrees(double deg)
{
    double w = std::fmod(deg + 180.0, 360.0);
    if (w < 0.0) {
        w += 360.0;
    }
    return w - 180.0;
}

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double linear_to_db(double lin) { return 10.0 * std::log10(lin); }

struct PanelConfig {
    int elements_per_dim = 4;      // N, array is N x N
    double element_spacing = 0.5;  // wavelengths
    double boresight_azimuth = 0.0; // degrees, global frame
    double element_gain_dbi = 5.0;
    double front_to_back_db = 30.0; // attenuation behind the panel (|az| > 90 deg)

    void validate() const
    {
        if (elements_per_dim < 1) {
            throw ConfigError("panel: elements_per_dim must be >= 1");
        }
        if (!(element_spacing > 0.0)) {
            throw ConfigError("panel: element_spacing must be > 0");
        }
        if (!(front_to_back_db >= 0.0)) {
            throw ConfigError("panel: front_to_back_db must be >= 0");
        }
    }
};

/// Factorization of the per-panel beam count into an azimuth x elevation grid.
struct GridShape {
    int azimuth = 8;
    int elevation = 2;

    int size() const { return azimuth * elevation; }
};

/// Default factorization: two elevation rows whenever L_p is even.
inline GridShape default_grid(int beams_per_panel)
{
    if (beams_per_panel >= 2 && beams_per_panel % 2 == 0) {
        return {beams_per_panel / 2, 2};
    }
    return {beams_per_panel, 1};
}

struct Beam {
    int panel = 0;
    int local_index = 0;
    int global_index = 0;
    PanelConfig panel_config;
    double u = 0.0; // horizontal direction cosine sin(az)cos(el)
    double v = 0.0; // vertical direction cosine sin(el)
    std::vector<std::complex<double>> steering_weights; // N*N, index m*N + n
    double pointing_azimuth = 0.0;   // degrees, global frame
    double pointing_elevation = 0.0; // degrees
};

/// Direction cosine of DFT bin k on the half-bin-shifted grid of an N-element axis.
inline double dft_direction_cosine(int k, int n_elements, double spacing)
{
    return (2.0 * k + 1.0 - n_elements) / (2.0 * spacing * n_elements);
}

/// Unit-norm response of an N x N panel towards (u, v).
inline std::vector<std::complex<double>> array_response(int n_elements, double spacing, double u, double v)
{
    std::vector<std::complex<double>> a(static_cast<std::size_t>(n_elements) * n_elements);
    const double scale = 1.0 / n_elements;
    for (int m = 0; m < n_elements; ++m) {
        for (int n = 0; n < n_elements; ++n) {
            const double phase = 2.0 * kPi * spacing * (m * u + n * v);
            a[static_cast<std::size_t>(m) * n_elements + n] = std::polar(scale, phase);
        }
    }
    return a;
}

class Codebook {
public:
    Codebook() = default;

    Codebook(std::span<const PanelConfig> panels, int beams_per_panel, GridShape grid)
        : beams_per_panel_(beams_per_panel), panel_count_(static_cast<int>(panels.size())), grid_(grid)
    {
        if (panels.empty()) {
            throw ConfigError("codebook: at least one panel is required");
        }
        if (beams_per_panel < 1 || grid.azimuth < 1 || grid.elevation < 1 || grid.size() != beams_per_panel) {
            throw ConfigError("codebook: beams_per_panel=" + std::to_string(beams_per_panel) +
                              " is not factorable as " + std::to_string(grid.azimuth) + " azimuth x " +
                              std::to_string(grid.elevation) + " elevation beams");
        }
        beams_.reserve(panels.size() * static_cast<std::size_t>(beams_per_panel));
        for (int p = 0; p < panel_count_; ++p) {
            const PanelConfig& cfg = panels[static_cast<std::size_t>(p)];
            cfg.validate();
            const int n = cfg.elements_per_dim;
            if (grid.azimuth > n || grid.elevation > n) {
                throw ConfigError("codebook: a " + std::to_string(grid.azimuth) + "x" +
                                  std::to_string(grid.elevation) + " DFT grid needs at least that many elements "
                                  "per dimension, panel has " + std::to_string(n));
            }
            const int az_offset = (n - grid.azimuth) / 2;
            const int el_offset = (n - grid.elevation) / 2;
            for (int ia = 0; ia < grid.azimuth; ++ia) {
                for (int ie = 0; ie < grid.elevation; ++ie) {
                    Beam beam;
                    beam.panel = p;
                    beam.local_index = ia * grid.elevation + ie;
                    beam.global_index = encode(p, beam.local_index);
                    beam.panel_config = cfg;
                    beam.u = dft_direction_cosine(az_offset + ia, n, cfg.element_spacing);
                    beam.v = dft_direction_cosine(el_offset + ie, n, cfg.element_spacing);
                    const double cos_el_sq = 1.0 - beam.v * beam.v;
                    if (std::abs(beam.v) >= 1.0 || beam.u * beam.u >= cos_el_sq) {
                        throw ConfigError("codebook: DFT beam outside visible region; reduce element_spacing");
                    }
                    const double el = std::asin(beam.v);
                    const double az = std::asin(beam.u / std::cos(el));
                    beam.pointing_elevation = rad2deg(el);
                    beam.pointing_azimuth = wrap_degrees(cfg.boresight_azimuth + rad2deg(az));
                    beam.steering_weights = array_response(n, cfg.element_spacing, beam.u, beam.v);
                    beams_.push_back(std::move(beam));
                }
            }
        }
    }

    int size() const { return static_cast<int>(beams_.size()); }
    int beams_per_panel() const { return beams_per_panel_; }
    int panel_count() const { return panel_count_; }
    GridShape grid() const { return grid_; }

    const Beam& operator[](int b) const { return beams_[static_cast<std::size_t>(b)]; }
    const std::vector<Beam>& beams() const { return beams_; }

    int encode(int panel, int local_index) const { return panel * beams_per_panel_ + local_index; }
    std::pair<int, int> decode(int b) const { return {b / beams_per_panel_, b % beams_per_panel_}; }
    int panel_of(int b) const { return b / beams_per_panel_; }

private:
    int beams_per_panel_ = 0;
    int panel_count_ = 0;
    GridShape grid_{};
    std::vector<Beam> beams_;
};

inline Codebook build_codebook(std::span<const PanelConfig> panels, int beams_per_panel, GridShape grid)
{
    return Codebook(panels, beams_per_panel, grid);
}

inline Codebook build_codebook(std::span<const PanelConfig> panels, int beams_per_panel)
{
    return Codebook(panels, beams_per_panel, default_grid(beams_per_panel));
}

namespace detail {

// |(1/N) sum_m exp(j*2*pi*d*m*x)|^2, the normalized Dirichlet kernel.
inline double dirichlet_power(double x, int n_elements, double spacing)
{
    const double den = std::sin(kPi * spacing * x);
    if (std::abs(den) < 1e-12) {
        return 1.0;
    }
    const double num = std::sin(kPi * spacing * n_elements * x);
    return (num * num) / (static_cast<double>(n_elements) * n_elements * den * den);
}

} // namespace detail

/// Normalized array-factor power |a(az, el)^H w|^2 in [0, 1].
inline double array_factor_power(const Beam& beam, double azimuth_deg, double elevation_deg)
{
    const PanelConfig& cfg = beam.panel_config;
    const double az = deg2rad(wrap_degrees(azimuth_deg - cfg.boresight_azimuth));
    const double el = deg2rad(elevation_deg);
    const double u = std::sin(az) * std::cos(el);
    const double v = std::sin(el);
    return detail::dirichlet_power(beam.u - u, cfg.elements_per_dim, cfg.element_spacing) *
           detail::dirichlet_power(beam.v - v, cfg.elements_per_dim, cfg.element_spacing);
}

/// Linear power gain of a beam towards a global (azimuth, elevation).
inline double beam_gain_linear(const Beam& beam, double azimuth_deg, double elevation_deg)
{
    const PanelConfig& cfg = beam.panel_config;
    const double n2 = static_cast<double>(cfg.elements_per_dim) * cfg.elements_per_dim;
    double gain = std::max(array_factor_power(beam, azimuth_deg, elevation_deg), 1e-30) * n2 *
                  db_to_linear(cfg.element_gain_dbi);
    if (std::abs(wrap_degrees(azimuth_deg - cfg.boresight_azimuth)) > 90.0) {
        gain *= db_to_linear(-cfg.front_to_back_db);
    }
    return gain;
}

/// 10*log10(|a^H w|^2 * N^2) + element gain, less the front-to-back loss behind the panel.
inline double beam_gain_dbi(const Beam& beam, double azimuth_deg, double elevation_deg)
{
    return linear_to_db(beam_gain_linear(beam, azimuth_deg, elevation_deg));
}

/// Discretized angular region over which beam patterns are compared.
struct AngularGrid {
    double azimuth_step_deg = 1.0;
    double elevation_min_deg = -30.0;
    double elevation_max_deg = 30.0;
    double elevation_step_deg = 1.0;
    double floor_db = -50.0; // pattern floor relative to its own peak

    int azimuth_points() const { return static_cast<int>(std::lround(360.0 / azimuth_step_deg)); }
    int elevation_points() const
    {
        return static_cast<int>(std::lround((elevation_max_deg - elevation_min_deg) / elevation_step_deg)) + 1;
    }
};

/// Linear-power pattern of a beam sampled on the grid, floored relative to its peak.
inline std::vector<double> power_pattern(const Beam& beam, const AngularGrid& grid)
{
    const int naz = grid.azimuth_points();
    const int nel = grid.elevation_points();
    std::vector<double> pattern(static_cast<std::size_t>(naz) * nel);
    double peak = 0.0;
    for (int i = 0; i < naz; ++i) {
        const double az = -180.0 + i * grid.azimuth_step_deg;
        for (int k = 0; k < nel; ++k) {
            const double el = grid.elevation_min_deg + k * grid.elevation_step_deg;
            const double g = beam_gain_linear(beam, az, el);
            pattern[static_cast<std::size_t>(i) * nel + k] = g;
            peak = std::max(peak, g);
        }
    }
    const double floor = peak * db_to_linear(grid.floor_db);
    for (double& g : pattern) {
        g = std::max(g, floor);
    }
    return pattern;
}

/// Normalized overlap of two sampled power patterns.
inline double pattern_overlap(std::span<const double> gb, std::span<const double> gj)
{
    if (gb.size() != gj.size()) {
        throw ValidationError("pattern_overlap: pattern sizes differ");
    }
    double cross = 0.0;
    double eb = 0.0;
    double ej = 0.0;
    for (std::size_t i = 0; i < gb.size(); ++i) {
        cross += gb[i] * gj[i];
        eb += gb[i] * gb[i];
        ej += gj[i] * gj[i];
    }
    if (eb <= 0.0 || ej <= 0.0) {
        return 0.0;
    }
    return std::clamp(cross / std::sqrt(eb * ej), 0.0, 1.0);
}

inline double cross_correlation(const Beam& beam_b, const Beam& beam_j, const AngularGrid& grid = {})
{
    if (beam_b.global_index == beam_j.global_index && beam_b.panel_config.boresight_azimuth ==
                                                          beam_j.panel_config.boresight_azimuth) {
        return 1.0;
    }
    const auto gb = power_pattern(beam_b, grid);
    const auto gj = power_pattern(beam_j, grid);
    return pattern_overlap(gb, gj);
}

/// Symmetric B x B matrix of beam cross-correlations with a unit diagonal.
class CorrelationMatrix {
public:
    CorrelationMatrix() = default;
    explicit CorrelationMatrix(int size) : size_(size), rho_(static_cast<std::size_t>(size) * size, 0.0)
    {
        for (int b = 0; b < size; ++b) {
            set(b, b, 1.0);
        }
    }

    int size() const { return size_; }
    double operator()(int b, int j) const { return rho_[static_cast<std::size_t>(b) * size_ + j]; }
    std::span<const double> row(int b) const
    {
        return {rho_.data() + static_cast<std::size_t>(b) * size_, static_cast<std::size_t>(size_)};
    }

    void set(int b, int j, double value)
    {
        rho_[static_cast<std::size_t>(b) * size_ + j] = value;
        rho_[static_cast<std::size_t>(j) * size_ + b] = value;
    }

    /// rho.csv: one "b,j,value" line per entry, six decimals.
    void write_csv(const std::string& path) const
    {
        std::ofstream out(path);
        if (!out) {
            throw std::runtime_error("cannot open " + path);
        }
        out << "b,j,rho\n";
        char buf[64];
        for (int b = 0; b < size_; ++b) {
            for (int j = 0; j < size_; ++j) {
                std::snprintf(buf, sizeof(buf), "%d,%d,%.6f\n", b, j, (*this)(b, j));
                out << buf;
            }
        }
    }

private:
    int size_ = 0;
    std::vector<double> rho_;
};

/// Precomputes every pairwise correlation of a codebook, sampling each pattern once.
inline CorrelationMatrix compute_correlation(const Codebook& codebook, const AngularGrid& grid = {})
{
    const int count = codebook.size();
    std::vector<std::vector<double>> patterns;
    patterns.reserve(static_cast<std::size_t>(count));
    for (const Beam& beam : codebook.beams()) {
        patterns.push_back(power_pattern(beam, grid));
    }
    CorrelationMatrix rho(count);
    for (int b = 0; b < count; ++b) {
        for (int j = b + 1; j < count; ++j) {
            rho.set(b, j, pattern_overlap(patterns[static_cast<std::size_t>(b)], patterns[static_cast<std::size_t>(j)]));
        }
    }
    return rho;
}

} // namespace mmbeam
