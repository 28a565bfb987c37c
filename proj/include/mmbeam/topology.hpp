#pragma once

// Multi-cell layout, terminal placement and mobility, and the large-scale
// channel: pathloss + frozen log-normal shadowing + beam pattern gain.

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <iostream>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "mmbeam/codebook.hpp"
#include "mmbeam/error.hpp"

namespace mmbeam {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;
};

inline constexpr double kMinDistance = 10.0; // meters, near-field clamp

/// Hexagonal service area with edge normals at 0, 60, ..., 300 degrees.
struct HexRegion {
    Vec2 center{};
    double circumradius = 1.0;

    double inradius() const { return circumradius * std::cos(kPi / 6.0); }

    static std::array<Vec2, 6> normals()
    {
        std::array<Vec2, 6> n{};
        for (int k = 0; k < 6; ++k) {
            const double a = k * kPi / 3.0;
            n[static_cast<std::size_t>(k)] = {std::cos(a), std::sin(a)};
        }
        return n;
    }

    bool contains(Vec2 p) const
    {
        const double r = inradius();
        for (const Vec2& n : normals()) {
            if ((p.x - center.x) * n.x + (p.y - center.y) * n.y > r) {
                return false;
            }
        }
        return true;
    }

    /// Specular reflection off the hexagon edges; heading is mirrored alongside.
    Vec2 reflect(Vec2 p, double& heading) const
    {
        const double r = inradius();
        const auto ns = normals();
        for (int iter = 0; iter < 64; ++iter) {
            double worst = 0.0;
            int edge = -1;
            for (int k = 0; k < 6; ++k) {
                const Vec2& n = ns[static_cast<std::size_t>(k)];
                const double excess = (p.x - center.x) * n.x + (p.y - center.y) * n.y - r;
                if (excess > worst) {
                    worst = excess;
                    edge = k;
                }
            }
            if (edge < 0) {
                return p;
            }
            const Vec2& n = ns[static_cast<std::size_t>(edge)];
            p.x -= 2.0 * worst * n.x;
            p.y -= 2.0 * worst * n.y;
            double vx = std::cos(heading);
            double vy = std::sin(heading);
            const double dot = vx * n.x + vy * n.y;
            vx -= 2.0 * dot * n.x;
            vy -= 2.0 * dot * n.y;
            heading = std::atan2(vy, vx);
        }
        // Pathological step sizes: fall back to the centre.
        return center;
    }
};

struct NetworkLayout {
    std::vector<Vec2> sites;
    double inter_site_distance = 200.0;
    int sectors_per_site = 3;
    std::vector<double> sector_boresights{30.0, 150.0, 270.0}; // degrees, per sector of a site
    int panels_per_sector = 3;
    std::vector<double> panel_boresights{-40.0, 0.0, 40.0}; // degrees, offset from sector boresight
    double carrier_ghz = 30.0;
    double bandwidth_hz = 200e6;
    double tx_power_dbm = 40.0; // per sector (gNB)
    double noise_density_dbm_hz = -174.0;
    double noise_figure_db = 3.0;
    double bs_height = 25.0;
    double mt_height = 1.5;
    double downtilt_deg = 12.0;
    double shadowing_std_db = 4.0;
    HexRegion region{};

    int sector_count() const { return static_cast<int>(sites.size()) * sectors_per_site; }
    int site_of(int sector) const { return sector / sectors_per_site; }
    double sector_boresight(int sector) const
    {
        return sector_boresights[static_cast<std::size_t>(sector % sectors_per_site)];
    }
    double panel_boresight(int sector, int panel) const
    {
        return wrap_degrees(sector_boresight(sector) + panel_boresights[static_cast<std::size_t>(panel)]);
    }

    /// Each panel has its own RF chain and an equal share of the sector power.
    double tx_power_per_beam_dbm() const { return tx_power_dbm - linear_to_db(panels_per_sector); }

    void validate() const
    {
        if (sites.empty()) {
            throw ConfigError("layout: no sites");
        }
        if (!(inter_site_distance > 0.0)) {
            throw ConfigError("layout: inter_site_distance must be > 0");
        }
        if (sectors_per_site != 3 || static_cast<int>(sector_boresights.size()) != sectors_per_site) {
            throw ConfigError("layout: exactly 3 sectors per site are supported");
        }
        for (int s = 1; s < sectors_per_site; ++s) {
            const double diff = sector_boresights[static_cast<std::size_t>(s)] - sector_boresights[static_cast<std::size_t>(s - 1)];
            if (std::abs(wrap_degrees(diff - 120.0)) > 1e-9) {
                throw ConfigError("layout: sector boresights must be 120 degrees apart");
            }
        }
        if (panels_per_sector < 1 || static_cast<int>(panel_boresights.size()) != panels_per_sector) {
            throw ConfigError("layout: panels_per_sector must be >= 1 with one boresight per panel");
        }
        if (!(carrier_ghz > 0.0) || !(bandwidth_hz > 0.0)) {
            throw ConfigError("layout: carrier frequency and bandwidth must be > 0");
        }
        if (!(region.circumradius > 0.0)) {
            throw ConfigError("layout: empty service region");
        }
    }
};

/// Panel offsets that split a 120 degree sector evenly between M_p panels.
inline std::vector<double> even_panel_offsets(int panels_per_sector)
{
    std::vector<double> offsets;
    for (int p = 0; p < panels_per_sector; ++p) {
        offsets.push_back(-60.0 + 120.0 * (p + 0.5) / panels_per_sector);
    }
    return offsets;
}

/// Hexagonal grid of 1 or 7 three-sector sites.
inline NetworkLayout make_hex_layout(int site_count, double inter_site_distance, int panels_per_sector)
{
    if (site_count != 1 && site_count != 7) {
        throw ConfigError("layout: sites must be 1 or 7, got " + std::to_string(site_count));
    }
    NetworkLayout layout;
    layout.inter_site_distance = inter_site_distance;
    layout.sites.push_back({0.0, 0.0});
    if (site_count == 7) {
        for (int k = 0; k < 6; ++k) {
            const double a = deg2rad(30.0 + 60.0 * k);
            layout.sites.push_back({inter_site_distance * std::cos(a), inter_site_distance * std::sin(a)});
        }
    }
    const double outer = site_count == 7 ? inter_site_distance : 0.0;
    layout.region = {{0.0, 0.0}, outer + inter_site_distance / std::sqrt(3.0)};
    layout.panels_per_sector = panels_per_sector;
    layout.panel_boresights = even_panel_offsets(panels_per_sector);
    return layout;
}

/// Panel configurations of one sector, boresights in the global frame.
inline std::vector<PanelConfig> sector_panels(const NetworkLayout& layout, int sector, const PanelConfig& base)
{
    std::vector<PanelConfig> panels;
    for (int p = 0; p < layout.panels_per_sector; ++p) {
        PanelConfig cfg = base;
        cfg.boresight_azimuth = layout.panel_boresight(sector, p);
        panels.push_back(cfg);
    }
    return panels;
}

struct MobileTerminal {
    int id = 0;
    Vec2 position{};
    double speed_kmh = 0.0;
    double heading = 0.0; // radians
    int serving_sector = -1;
    int serving_beam = -1; // sector-local beam index b = p*L_p + j
};

/// d_min-clamped 28 + 22 log10(d) + 20 log10(f_GHz).
inline double pathloss_db(double distance_m, double freq_ghz)
{
    if (distance_m < kMinDistance) {
        static std::atomic<bool> logged{false};
        if (!logged.exchange(true)) {
            std::clog << "mmbeam: link distance below " << kMinDistance << " m clamped\n";
        }
        distance_m = kMinDistance;
    }
    return 28.0 + 22.0 * std::log10(distance_m) + 20.0 * std::log10(freq_ghz);
}

struct LinkGeometry {
    double distance = 0.0;  // 3D, meters
    double pathloss = 0.0;  // dB
    double azimuth = 0.0;   // degrees of departure, global frame
    double elevation = 0.0; // degrees above the down-tilted panel broadside
};

inline LinkGeometry link_geometry(const NetworkLayout& layout, Vec2 position, int sector)
{
    const Vec2 site = layout.sites[static_cast<std::size_t>(layout.site_of(sector))];
    const double dx = position.x - site.x;
    const double dy = position.y - site.y;
    const double d2 = std::hypot(dx, dy);
    const double dh = layout.bs_height - layout.mt_height;
    LinkGeometry g;
    g.distance = std::hypot(d2, dh);
    g.pathloss = pathloss_db(g.distance, layout.carrier_ghz);
    g.azimuth = rad2deg(std::atan2(dy, dx));
    g.elevation = layout.downtilt_deg - rad2deg(std::atan2(dh, d2));
    return g;
}

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x)
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

} // namespace detail

/// Independent, reproducible stream seed for a (seed, tag, index) triple.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag, std::uint64_t index = 0)
{
    return detail::splitmix64(detail::splitmix64(seed ^ detail::splitmix64(tag)) + index);
}

/// Per-(MT, sector) geometry plus the frozen shadowing draw.
class LinkState {
public:
    LinkState() = default;

    LinkState(const NetworkLayout& layout, int mt_count, std::uint64_t seed)
        : mt_count_(mt_count), sector_count_(layout.sector_count()),
          geometry_(static_cast<std::size_t>(mt_count) * sector_count_),
          shadowing_(static_cast<std::size_t>(mt_count) * sector_count_)
    {
        for (int mt = 0; mt < mt_count; ++mt) {
            for (int s = 0; s < sector_count_; ++s) {
                shadowing_[index(mt, s)] = draw_shadowing(layout.shadowing_std_db, seed, mt, s);
            }
        }
    }

    /// The shadowing value depends on (seed, mt, sector) only.
    static double draw_shadowing(double std_db, std::uint64_t seed, int mt, int sector)
    {
        if (std_db <= 0.0) {
            return 0.0;
        }
        std::mt19937_64 rng(derive_seed(seed, 0x5ad0, (static_cast<std::uint64_t>(mt) << 20) ^ static_cast<std::uint64_t>(sector)));
        std::normal_distribution<double> normal(0.0, std_db);
        return normal(rng);
    }

    int mt_count() const { return mt_count_; }
    int sector_count() const { return sector_count_; }

    const LinkGeometry& geometry(int mt, int sector) const { return geometry_[index(mt, sector)]; }
    double shadowing_db(int mt, int sector) const { return shadowing_[index(mt, sector)]; }
    void set_shadowing_db(int mt, int sector, double value) { shadowing_[index(mt, sector)] = value; }

    void update(const NetworkLayout& layout, const MobileTerminal& mt)
    {
        for (int s = 0; s < sector_count_; ++s) {
            geometry_[index(mt.id, s)] = link_geometry(layout, mt.position, s);
        }
    }

    void update(const NetworkLayout& layout, std::span<const MobileTerminal> terminals)
    {
        for (const MobileTerminal& mt : terminals) {
            update(layout, mt);
        }
    }

private:
    std::size_t index(int mt, int sector) const
    {
        return static_cast<std::size_t>(mt) * sector_count_ + static_cast<std::size_t>(sector);
    }

    int mt_count_ = 0;
    int sector_count_ = 0;
    std::vector<LinkGeometry> geometry_;
    std::vector<double> shadowing_;
};

/// Raw received power of one beam of `sector` at the terminal; not clipped.
inline double rx_power_dbm(const MobileTerminal& mt, const Beam& beam, int sector, const NetworkLayout& layout,
                           const LinkState& links)
{
    const LinkGeometry& g = links.geometry(mt.id, sector);
    return layout.tx_power_per_beam_dbm() + beam_gain_dbi(beam, g.azimuth, g.elevation) - g.pathloss -
           links.shadowing_db(mt.id, sector);
}

/// Best-beam received power of a sector, used for attachment.
inline double wideband_rx_dbm(const MobileTerminal& mt, int sector, const NetworkLayout& layout,
                              const LinkState& links, const Codebook& codebook)
{
    double best = -1e300;
    for (const Beam& beam : codebook.beams()) {
        best = std::max(best, rx_power_dbm(mt, beam, sector, layout, links));
    }
    return best;
}

/// Uniform drop over the service region; each MT attaches to its strongest
/// sector and starts on that sector's strongest beam. `links` must be sized
/// for `count` terminals; its geometry is refreshed here.
inline std::vector<MobileTerminal> place_terminals(const NetworkLayout& layout, int count, std::uint64_t seed,
                                                   std::span<const Codebook> codebooks, LinkState& links,
                                                   double speed_kmh = 3.0)
{
    if (count < 0) {
        throw ValidationError("place_terminals: negative count");
    }
    if (static_cast<int>(codebooks.size()) != layout.sector_count()) {
        throw ValidationError("place_terminals: need one codebook per sector");
    }
    std::mt19937_64 rng(derive_seed(seed, 0x91ace));
    const HexRegion& region = layout.region;
    std::uniform_real_distribution<double> ux(-region.inradius(), region.inradius());
    std::uniform_real_distribution<double> uy(-region.circumradius, region.circumradius);
    std::uniform_real_distribution<double> uh(0.0, 2.0 * kPi);
    std::vector<MobileTerminal> terminals;
    terminals.reserve(static_cast<std::size_t>(count));
    for (int id = 0; id < count; ++id) {
        MobileTerminal mt;
        mt.id = id;
        do {
            mt.position = {region.center.x + ux(rng), region.center.y + uy(rng)};
        } while (!region.contains(mt.position));
        mt.speed_kmh = speed_kmh;
        mt.heading = uh(rng);
        links.update(layout, mt);
        double best = -1e300;
        for (int s = 0; s < layout.sector_count(); ++s) {
            const double p = wideband_rx_dbm(mt, s, layout, links, codebooks[static_cast<std::size_t>(s)]);
            if (p > best) {
                best = p;
                mt.serving_sector = s;
            }
        }
        const Codebook& cb = codebooks[static_cast<std::size_t>(mt.serving_sector)];
        double best_beam = -1e300;
        for (const Beam& beam : cb.beams()) {
            const double p = rx_power_dbm(mt, beam, mt.serving_sector, layout, links);
            if (p > best_beam) {
                best_beam = p;
                mt.serving_beam = beam.global_index;
            }
        }
        terminals.push_back(mt);
    }
    return terminals;
}

/// Straight-line motion with specular reflection at the region boundary.
inline MobileTerminal step_mobility(MobileTerminal mt, double dt, const HexRegion& region)
{
    if (dt < 0.0) {
        throw ValidationError("step_mobility: negative dt");
    }
    const double step = mt.speed_kmh / 3.6 * dt;
    if (step == 0.0) {
        return mt;
    }
    Vec2 p{mt.position.x + step * std::cos(mt.heading), mt.position.y + step * std::sin(mt.heading)};
    mt.position = region.reflect(p, mt.heading);
    return mt;
}

} // namespace mmbeam
