#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "softtree/observation.hpp"

namespace softtree {

inline constexpr std::size_t kHoursPerDay = 24;

// One day of aligned hourly series. PV is nonpositive (generation).
struct ProfileDay {
    std::string date;
    std::vector<double> lambda_con;  // EUR/kWh
    std::vector<double> p_con;       // kW, >= 0
    std::vector<double> p_pv;        // kW, <= 0

    bool operator==(const ProfileDay&) const = default;
};

struct ProfileSet {
    std::vector<ProfileDay> days;
    std::vector<std::size_t> train_days;
    std::vector<std::size_t> eval_days;

    std::size_t size() const { return days.size(); }
};

// Throws ValidationError when lengths, signs or finiteness are violated.
void validate(const ProfileDay& day);

// Assigns the first round(train_fraction * n) days (after an optional seeded
// shuffle) to training and the rest to evaluation. Each side gets at least
// one day; a single-day set uses that day for both.
void assign_split(ProfileSet& ps, double train_fraction = 0.8,
                  std::optional<std::uint64_t> shuffle_seed = std::nullopt);

// CSV with header `date,hour,lambda_con_eur_per_kwh,p_con_kw,p_pv_kw`.
// Rows are grouped by date in order of first appearance; every date needs
// hours 0..23 exactly once. The returned set has the default split.
ProfileSet load_csv(const std::filesystem::path& path);
ProfileSet parse_csv(std::istream& in, const std::string& source_name = "<stream>");
void write_csv(const ProfileSet& ps, std::ostream& out);
void write_csv(const ProfileSet& ps, const std::filesystem::path& path);

struct SynthesisConfig {
    // price (EUR/kWh)
    double price_base = 0.10;
    double price_morning_peak = 0.15;   // bump around 08:00
    double price_evening_peak = 0.35;   // bump around 19:00
    double price_solar_dip = 0.08;      // midday depression
    double price_noise = 0.01;
    double price_day_spread = 0.2;      // per-day level factor in [1-s, 1+s]
    double price_mean_min = 0.05;
    double price_mean_max = 0.50;
    // load (kW)
    double load_base = 0.35;
    double load_morning_peak = 1.2;
    double load_evening_peak = 2.0;
    double load_noise = 0.1;
    double load_day_spread = 0.2;
    // PV (kW, magnitude)
    double pv_peak = 1.5;
    double sunrise_hour = 6.0;
    double sunset_hour = 20.0;
    double cloudiness_min = 0.1;        // per-day PV factor in [min, 1]

    bool operator==(const SynthesisConfig&) const = default;
};

void validate(const SynthesisConfig& cfg);

// Seeded synthetic days. Dates are tagged "synthetic-NNNN".
ProfileSet synthesize(const SynthesisConfig& cfg, std::size_t n_days, std::uint64_t seed);

// Per-feature min-max scaling. SoC is passed through unchanged.
struct NormStats {
    Observation shift{};
    Observation scale{1.0, 1.0, 1.0, 1.0};

    bool operator==(const NormStats&) const = default;
};

// Fits over the training split only.
NormStats norm_fit(const ProfileSet& ps);
Observation norm_apply(const NormStats& stats, const Observation& raw);
double norm_invert(const NormStats& stats, std::size_t feature, double normalized);

// Same transform with every feature stretched from [0, 1] to [0, upper].
NormStats norm_rescale(const NormStats& stats, double upper);

// Raw [min, max] of each feature over the training split (SoC is [0, 1]).
std::vector<std::pair<double, double>> observed_ranges(const ProfileSet& ps);

}  // namespace softtree
