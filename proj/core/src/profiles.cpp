#include "softtree/profiles.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <numbers>
#include <random>
#include <sstream>

#include "softtree/error.hpp"
#include "softtree/log.hpp"

namespace softtree {

namespace {

constexpr std::array<const char*, 5> kColumns = {"date", "hour", "lambda_con_eur_per_kwh",
                                                 "p_con_kw", "p_pv_kw"};

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
        s.remove_suffix(1);
    return s;
}

std::vector<std::string_view> split_row(std::string_view line) {
    std::vector<std::string_view> cells;
    std::size_t start = 0;
    while (true) {
        const auto pos = line.find(',', start);
        cells.push_back(trim(line.substr(start, pos - start)));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return cells;
}

double parse_number(std::string_view cell, std::size_t row, const char* column) {
    double v = 0.0;
    const auto* first = cell.data();
    const auto* last = cell.data() + cell.size();
    if (!cell.empty() && *first == '+') ++first;
    const auto [ptr, ec] = std::from_chars(first, last, v);
    if (cell.empty() || ec != std::errc{} || ptr != last || !std::isfinite(v)) {
        throw ParseError("row " + std::to_string(row) + ": column " + column +
                         " is not a finite number: '" + std::string(cell) + "'");
    }
    return v;
}

double gauss_bump(double t, double center, double width) {
    const double d = (t - center) / width;
    return std::exp(-0.5 * d * d);
}

}  // namespace

void validate(const ProfileDay& day) {
    if (day.lambda_con.size() != kHoursPerDay || day.p_con.size() != kHoursPerDay ||
        day.p_pv.size() != kHoursPerDay) {
        throw ValidationError("day " + day.date + " does not have 24 hourly values per series");
    }
    for (std::size_t h = 0; h < kHoursPerDay; ++h) {
        if (!std::isfinite(day.lambda_con[h]) || !std::isfinite(day.p_con[h]) ||
            !std::isfinite(day.p_pv[h])) {
            throw ValidationError("day " + day.date + " has a non-finite value at hour " +
                                  std::to_string(h));
        }
        if (day.lambda_con[h] < 0.0) {
            throw ValidationError("day " + day.date + " has a negative price at hour " +
                                  std::to_string(h));
        }
        if (day.p_con[h] < 0.0) {
            throw ValidationError("day " + day.date + " has negative load at hour " +
                                  std::to_string(h));
        }
        if (day.p_pv[h] > 0.0) {
            throw ValidationError("day " + day.date + " has positive PV power at hour " +
                                  std::to_string(h) + " (generation must be <= 0)");
        }
    }
}

void assign_split(ProfileSet& ps, double train_fraction, std::optional<std::uint64_t> shuffle_seed) {
    const std::size_t n = ps.days.size();
    if (n == 0) throw ValidationError("profile set is empty");
    if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
        throw ValidationError("train_fraction must lie in (0, 1)");
    }
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    if (shuffle_seed) {
        std::mt19937_64 rng(*shuffle_seed);
        std::shuffle(order.begin(), order.end(), rng);
    }
    ps.train_days.clear();
    ps.eval_days.clear();
    if (n == 1) {
        ps.train_days = {0};
        ps.eval_days = {0};
        return;
    }
    auto n_train = static_cast<std::size_t>(std::llround(train_fraction * static_cast<double>(n)));
    n_train = std::clamp<std::size_t>(n_train, 1, n - 1);
    ps.train_days.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_train));
    ps.eval_days.assign(order.begin() + static_cast<std::ptrdiff_t>(n_train), order.end());
    std::sort(ps.train_days.begin(), ps.train_days.end());
    std::sort(ps.eval_days.begin(), ps.eval_days.end());
}

ProfileSet parse_csv(std::istream& in, const std::string& source_name) {
    std::string line;
    std::size_t row = 1;
    if (!std::getline(in, line)) throw ParseError(source_name + ": empty file, header required");
    if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);

    const auto header = split_row(line);
    std::array<std::size_t, kColumns.size()> col{};
    std::string missing;
    for (std::size_t c = 0; c < kColumns.size(); ++c) {
        const auto it = std::find(header.begin(), header.end(), kColumns[c]);
        if (it == header.end()) {
            missing += (missing.empty() ? "" : ", ") + std::string(kColumns[c]);
        } else {
            col[c] = static_cast<std::size_t>(it - header.begin());
        }
    }
    if (!missing.empty()) throw ParseError(source_name + ": missing columns: " + missing);

    struct Pending {
        ProfileDay day;
        std::array<bool, kHoursPerDay> seen{};
    };
    std::vector<Pending> days;
    std::map<std::string, std::size_t, std::less<>> index;

    while (std::getline(in, line)) {
        ++row;
        if (trim(line).empty()) continue;
        const auto cells = split_row(line);
        if (cells.size() != header.size()) {
            throw ParseError(source_name + ": row " + std::to_string(row) + " has " +
                             std::to_string(cells.size()) + " cells, header has " +
                             std::to_string(header.size()));
        }
        const std::string date{cells[col[0]]};
        if (date.empty()) throw ParseError(source_name + ": row " + std::to_string(row) + ": empty date");
        const double hour_value = parse_number(cells[col[1]], row, kColumns[1]);
        if (hour_value != std::floor(hour_value) || hour_value < 0 || hour_value > 23) {
            throw ParseError(source_name + ": row " + std::to_string(row) +
                             ": hour must be an integer in 0..23");
        }
        const auto hour = static_cast<std::size_t>(hour_value);
        const double price = parse_number(cells[col[2]], row, kColumns[2]);
        const double load = parse_number(cells[col[3]], row, kColumns[3]);
        const double pv = parse_number(cells[col[4]], row, kColumns[4]);
        if (pv > 0.0) {
            throw ParseError(source_name + ": row " + std::to_string(row) +
                             ": p_pv_kw must be <= 0 (generation is negative), got " +
                             std::string(cells[col[4]]));
        }
        if (load < 0.0) {
            throw ParseError(source_name + ": row " + std::to_string(row) + ": p_con_kw must be >= 0");
        }
        if (price < 0.0) {
            throw ParseError(source_name + ": row " + std::to_string(row) +
                             ": lambda_con_eur_per_kwh must be >= 0");
        }

        auto [it, inserted] = index.try_emplace(date, days.size());
        if (inserted) {
            Pending p;
            p.day.date = date;
            p.day.lambda_con.assign(kHoursPerDay, 0.0);
            p.day.p_con.assign(kHoursPerDay, 0.0);
            p.day.p_pv.assign(kHoursPerDay, 0.0);
            days.push_back(std::move(p));
        }
        auto& pending = days[it->second];
        if (pending.seen[hour]) {
            throw ParseError(source_name + ": row " + std::to_string(row) + ": duplicate hour " +
                             std::to_string(hour) + " for date " + date);
        }
        pending.seen[hour] = true;
        pending.day.lambda_con[hour] = price;
        pending.day.p_con[hour] = load;
        pending.day.p_pv[hour] = pv;
    }

    ProfileSet ps;
    for (auto& p : days) {
        const auto n_seen = std::count(p.seen.begin(), p.seen.end(), true);
        if (n_seen != static_cast<long>(kHoursPerDay)) {
            throw ParseError(source_name + ": incomplete day " + p.day.date + " (" +
                             std::to_string(n_seen) + " of 24 hours)");
        }
        ps.days.push_back(std::move(p.day));
    }
    if (ps.days.empty()) throw ParseError(source_name + ": no data rows");
    assign_split(ps);
    return ps;
}

ProfileSet load_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open profile file " + path.string());
    return parse_csv(in, path.string());
}

void write_csv(const ProfileSet& ps, std::ostream& out) {
    out << "date,hour,lambda_con_eur_per_kwh,p_con_kw,p_pv_kw\n";
    out << std::setprecision(17);
    for (const auto& d : ps.days) {
        for (std::size_t h = 0; h < kHoursPerDay; ++h) {
            out << d.date << ',' << h << ',' << d.lambda_con[h] << ',' << d.p_con[h] << ','
                << d.p_pv[h] << '\n';
        }
    }
}

void write_csv(const ProfileSet& ps, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw ParseError("cannot write profile file " + path.string());
    write_csv(ps, out);
}

void validate(const SynthesisConfig& c) {
    auto nonneg = [](double v, const char* name) {
        if (!(v >= 0.0) || !std::isfinite(v)) {
            throw ValidationError(std::string("synthesis.") + name + " must be finite and >= 0");
        }
    };
    nonneg(c.price_base, "price_base");
    nonneg(c.price_morning_peak, "price_morning_peak");
    nonneg(c.price_evening_peak, "price_evening_peak");
    nonneg(c.price_solar_dip, "price_solar_dip");
    nonneg(c.price_noise, "price_noise");
    nonneg(c.load_base, "load_base");
    nonneg(c.load_morning_peak, "load_morning_peak");
    nonneg(c.load_evening_peak, "load_evening_peak");
    nonneg(c.load_noise, "load_noise");
    nonneg(c.pv_peak, "pv_peak");
    if (!(c.price_day_spread >= 0.0 && c.price_day_spread < 1.0))
        throw ValidationError("synthesis.price_day_spread must lie in [0, 1)");
    if (!(c.load_day_spread >= 0.0 && c.load_day_spread < 1.0))
        throw ValidationError("synthesis.load_day_spread must lie in [0, 1)");
    if (!(c.price_mean_min >= 0.0 && c.price_mean_min <= c.price_mean_max))
        throw ValidationError("synthesis price mean band must satisfy 0 <= min <= max");
    if (!(c.sunrise_hour >= 0.0 && c.sunrise_hour < c.sunset_hour && c.sunset_hour <= 24.0))
        throw ValidationError("synthesis daylight window must satisfy 0 <= sunrise < sunset <= 24");
    if (!(c.cloudiness_min >= 0.0 && c.cloudiness_min <= 1.0))
        throw ValidationError("synthesis.cloudiness_min must lie in [0, 1]");
}

ProfileSet synthesize(const SynthesisConfig& cfg, std::size_t n_days, std::uint64_t seed) {
    if (n_days < 1) throw ValidationError("n_days must be >= 1");
    validate(cfg);
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    ProfileSet ps;
    ps.days.reserve(n_days);
    for (std::size_t d = 0; d < n_days; ++d) {
        ProfileDay day;
        std::ostringstream tag;
        tag << "synthetic-" << std::setw(4) << std::setfill('0') << d;
        day.date = tag.str();

        const double price_level = 1.0 + cfg.price_day_spread * (2.0 * unit(rng) - 1.0);
        const double load_level = 1.0 + cfg.load_day_spread * (2.0 * unit(rng) - 1.0);
        const double cloud = cfg.cloudiness_min + (1.0 - cfg.cloudiness_min) * unit(rng);
        const double daylight = cfg.sunset_hour - cfg.sunrise_hour;

        day.lambda_con.resize(kHoursPerDay);
        day.p_con.resize(kHoursPerDay);
        day.p_pv.resize(kHoursPerDay);
        for (std::size_t h = 0; h < kHoursPerDay; ++h) {
            const double t = static_cast<double>(h) + 0.5;
            const double sun_phase = (t - cfg.sunrise_hour) / daylight;
            const double sun =
                (sun_phase > 0.0 && sun_phase < 1.0) ? std::sin(std::numbers::pi * sun_phase) : 0.0;

            double price = cfg.price_base + cfg.price_morning_peak * gauss_bump(t, 8.0, 1.5) +
                           cfg.price_evening_peak * gauss_bump(t, 19.0, 2.0) -
                           cfg.price_solar_dip * sun * sun;
            price = price * price_level + cfg.price_noise * normal(rng);
            day.lambda_con[h] = std::max(price, 0.0);

            double load = cfg.load_base + cfg.load_morning_peak * gauss_bump(t, 7.5, 1.0) +
                          cfg.load_evening_peak * gauss_bump(t, 19.5, 1.5);
            load = load * load_level + cfg.load_noise * normal(rng);
            day.p_con[h] = std::max(load, 0.0);

            const double pv = -cfg.pv_peak * cloud * sun;
            day.p_pv[h] = pv < 0.0 ? pv : 0.0;
        }

        // Keep the daily mean price inside the configured band.
        double mean = 0.0;
        for (double v : day.lambda_con) mean += v;
        mean /= static_cast<double>(kHoursPerDay);
        double target = std::clamp(mean, cfg.price_mean_min, cfg.price_mean_max);
        if (mean > 0.0 && target != mean) {
            for (double& v : day.lambda_con) v *= target / mean;
        } else if (mean == 0.0 && cfg.price_mean_min > 0.0) {
            for (double& v : day.lambda_con) v = cfg.price_mean_min;
        }
        ps.days.push_back(std::move(day));
    }
    assign_split(ps);
    return ps;
}

NormStats norm_fit(const ProfileSet& ps) {
    if (ps.train_days.empty()) throw ValidationError("normalization needs at least one training day");
    Observation lo, hi;
    lo.fill(std::numeric_limits<double>::infinity());
    hi.fill(-std::numeric_limits<double>::infinity());
    for (auto d : ps.train_days) {
        const auto& day = ps.days.at(d);
        for (std::size_t h = 0; h < kHoursPerDay; ++h) {
            const double v[] = {day.lambda_con[h], 0.0, day.p_con[h], day.p_pv[h]};
            for (std::size_t f : {kPrice, kLoad, kPv}) {
                lo[f] = std::min(lo[f], v[f]);
                hi[f] = std::max(hi[f], v[f]);
            }
        }
    }
    NormStats s;
    const auto names = feature_names();
    for (std::size_t f : {kPrice, kLoad, kPv}) {
        s.shift[f] = lo[f];
        if (hi[f] > lo[f]) {
            s.scale[f] = hi[f] - lo[f];
        } else {
            s.scale[f] = 1.0;
            logger().warn("feature '{}' is constant over the training days; scale forced to 1",
                          names[f]);
        }
    }
    s.shift[kSoc] = 0.0;
    s.scale[kSoc] = 1.0;
    return s;
}

Observation norm_apply(const NormStats& stats, const Observation& raw) {
    Observation out;
    for (std::size_t f = 0; f < kFeatureCount; ++f) out[f] = (raw[f] - stats.shift[f]) / stats.scale[f];
    return out;
}

double norm_invert(const NormStats& stats, std::size_t feature, double normalized) {
    if (feature >= kFeatureCount) throw ValidationError("feature index out of range");
    return normalized * stats.scale[feature] + stats.shift[feature];
}

NormStats norm_rescale(const NormStats& stats, double upper) {
    if (!(upper > 0.0) || !std::isfinite(upper)) throw ValidationError("normalization range must be > 0");
    NormStats out = stats;
    for (double& s : out.scale) s /= upper;
    return out;
}

std::vector<std::pair<double, double>> observed_ranges(const ProfileSet& ps) {
    std::vector<std::pair<double, double>> r(kFeatureCount,
                                             {std::numeric_limits<double>::infinity(),
                                              -std::numeric_limits<double>::infinity()});
    r[kSoc] = {0.0, 1.0};
    for (auto d : ps.train_days) {
        const auto& day = ps.days.at(d);
        for (std::size_t h = 0; h < kHoursPerDay; ++h) {
            const double v[] = {day.lambda_con[h], 0.0, day.p_con[h], day.p_pv[h]};
            for (std::size_t f : {kPrice, kLoad, kPv}) {
                r[f].first = std::min(r[f].first, v[f]);
                r[f].second = std::max(r[f].second, v[f]);
            }
        }
    }
    return r;
}

}  // namespace softtree
