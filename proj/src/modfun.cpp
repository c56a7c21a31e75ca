#include "bklab/modfun.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "bklab/errors.hpp"
#include "bklab/stats.hpp"

namespace bklab {

namespace {

std::string format_param(double v) {
    std::ostringstream os;
    os << v;
    return os.str();
}

double parse_number(std::string_view text, std::string_view spec) {
    double v = 0.0;
    const auto* first = text.data();
    const auto* last = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last) {
        throw ConfigError("bad number '" + std::string(text) + "' in function spec '" +
                          std::string(spec) + "'");
    }
    return v;
}

// "r=2,s=1" -> {r: 2, s: 1}
std::map<std::string, double> parse_params(std::string_view body, std::string_view spec) {
    std::map<std::string, double> out;
    while (!body.empty()) {
        const auto comma = body.find(',');
        const auto item = body.substr(0, comma);
        const auto eq = item.find('=');
        if (eq == std::string_view::npos) {
            throw ConfigError("expected key=value in function spec '" + std::string(spec) + "'");
        }
        out[std::string(item.substr(0, eq))] = parse_number(item.substr(eq + 1), spec);
        if (comma == std::string_view::npos) break;
        body.remove_prefix(comma + 1);
    }
    return out;
}

double require(const std::map<std::string, double>& params, const std::string& key,
               std::string_view spec) {
    auto it = params.find(key);
    if (it == params.end()) {
        throw ConfigError("function spec '" + std::string(spec) + "' is missing parameter " + key);
    }
    return it->second;
}

} // namespace

void GridSpec::validate() const {
    if (!(std::isfinite(t_min) && std::isfinite(t_max)) || t_min < 0.0 || !(t_min < t_max)) {
        throw DomainError("grid needs 0 <= t_min < t_max");
    }
    if (points < 2) throw DomainError("grid needs at least 2 points");
    if (spacing == Spacing::geometric && t_min <= 0.0) {
        throw DomainError("geometric grid needs t_min > 0");
    }
}

std::vector<double> GridSpec::values() const {
    validate();
    std::vector<double> out(points);
    const double last = static_cast<double>(points - 1);
    for (std::size_t i = 0; i < points; ++i) {
        const double u = static_cast<double>(i) / last;
        out[i] = spacing == Spacing::linear ? t_min + (t_max - t_min) * u
                                            : t_min * std::pow(t_max / t_min, u);
    }
    out.back() = t_max;
    return out;
}

GridSpec geometric_grid(double t_min, double t_max, std::size_t points) {
    return GridSpec{t_min, t_max, points, Spacing::geometric};
}

GridSpec linear_grid(double t_min, double t_max, std::size_t points) {
    return GridSpec{t_min, t_max, points, Spacing::linear};
}

ModerateFunction ModerateFunction::power(double r) {
    if (!std::isfinite(r) || r < 0.0) throw DomainError("power family needs r >= 0");
    ModerateFunction g;
    g.family_ = Family::power;
    g.r_ = r;
    g.params_ = {{"r", r}};
    g.name_ = r == 0.0 ? "const" : "power:r=" + format_param(r);
    g.claimed_doubling_ = std::exp2(r);
    g.claimed_moderate_ = r > 0.0;
    return g;
}

ModerateFunction ModerateFunction::powlog(double r, double s) {
    if (!std::isfinite(r) || !std::isfinite(s) || r < 0.0 || s < 0.0) {
        throw DomainError("powlog family needs r >= 0 and s >= 0");
    }
    ModerateFunction g;
    g.family_ = Family::powlog;
    g.r_ = r;
    g.s_ = s;
    g.params_ = {{"r", r}, {"s", s}};
    g.name_ = "powlog:r=" + format_param(r) + ",s=" + format_param(s);
    // log(e+2t) <= log 2 + log(e+t) and log(e+t) >= 1
    g.claimed_doubling_ = std::exp2(r) * std::pow(1.0 + std::numbers::ln2, s);
    g.claimed_moderate_ = r > 0.0 || s > 0.0;
    return g;
}

ModerateFunction ModerateFunction::exponential(double b) {
    if (!std::isfinite(b) || b <= 0.0) throw DomainError("exp family needs b > 0");
    ModerateFunction g;
    g.family_ = Family::exponential;
    g.b_ = b;
    g.params_ = {{"b", b}};
    g.name_ = "exp:b=" + format_param(b);
    g.claimed_moderate_ = false;
    return g;
}

ModerateFunction ModerateFunction::constant() { return power(0.0); }

ModerateFunction ModerateFunction::custom(std::string name, std::function<double(double)> fn,
                                          std::optional<double> claimed_doubling,
                                          bool claimed_moderate) {
    if (!fn) throw DomainError("custom function needs a callable");
    ModerateFunction g;
    g.family_ = Family::custom;
    g.name_ = std::move(name);
    g.fn_ = std::move(fn);
    g.claimed_doubling_ = claimed_doubling;
    g.claimed_moderate_ = claimed_moderate;
    return g;
}

ModerateFunction ModerateFunction::parse(std::string_view spec) {
    const auto colon = spec.find(':');
    const auto head = spec.substr(0, colon);
    const auto params = colon == std::string_view::npos ? std::map<std::string, double>{}
                                                        : parse_params(spec.substr(colon + 1), spec);
    if (head == "const") return constant();
    if (head == "power") return power(require(params, "r", spec));
    if (head == "powlog") return powlog(require(params, "r", spec), require(params, "s", spec));
    if (head == "exp") return exponential(params.count("b") != 0 ? params.at("b") : 1.0);
    throw ConfigError("unknown function family in '" + std::string(spec) + "'");
}

ModerateFunction ModerateFunction::dilated(double factor) const {
    if (!std::isfinite(factor) || factor <= 0.0) throw DomainError("dilation factor must be > 0");
    ModerateFunction g = *this;
    g.scale_ = scale_ * factor;
    g.name_ = name_ + "@x" + format_param(factor);
    return g;
}

bool ModerateFunction::is_constant() const noexcept {
    return (family_ == Family::power && r_ == 0.0) ||
           (family_ == Family::powlog && r_ == 0.0 && s_ == 0.0);
}

double ModerateFunction::value(double t) const noexcept {
    const double x = t * scale_;
    switch (family_) {
    case Family::power: return r_ == 0.0 ? 1.0 : std::pow(1.0 + x, r_);
    case Family::powlog:
        return std::pow(1.0 + x, r_) * std::pow(std::log(std::numbers::e + x), s_);
    case Family::exponential: return std::exp(b_ * x);
    case Family::custom: return fn_(x);
    }
    return std::numeric_limits<double>::quiet_NaN();
}

double ModerateFunction::log_value(double t) const noexcept {
    const double x = t * scale_;
    switch (family_) {
    case Family::power: return r_ == 0.0 ? 0.0 : r_ * std::log1p(x);
    case Family::powlog:
        return r_ * std::log1p(x) + s_ * std::log(std::log(std::numbers::e + x));
    case Family::exponential: return b_ * x;
    case Family::custom: return std::log(fn_(x));
    }
    return std::numeric_limits<double>::quiet_NaN();
}

std::optional<double> ModerateFunction::analytic_doubling_sup() const noexcept {
    if (family_ == Family::power) return std::exp2(r_);
    return std::nullopt;
}

double eval(const ModerateFunction& g, double t) {
    if (!std::isfinite(t) || t < 0.0) {
        throw DomainError("G(t) needs finite t >= 0, got " + std::to_string(t));
    }
    const double v = g.value(t);
    if (std::isnan(v) || v <= 0.0) {
        throw DomainError(g.name() + " is not positive at t=" + std::to_string(t));
    }
    return v;
}

namespace {

double doubling_ratio(const ModerateFunction& g, double t) {
    const double hi = g.value(2.0 * t);
    const double lo = g.value(t);
    if (std::isfinite(hi) && std::isfinite(lo) && lo > 0.0) return hi / lo;
    return std::exp(g.log_value(2.0 * t) - g.log_value(t));
}

} // namespace

DoublingAudit doubling_ratio_sup(const ModerateFunction& g, const GridSpec& grid) {
    DoublingAudit audit;
    audit.grid = grid.values();
    audit.analytic_sup = g.analytic_doubling_sup();
    audit.ratios.reserve(audit.grid.size());
    for (double t : audit.grid) {
        const double r = doubling_ratio(g, t);
        audit.ratios.push_back(r);
        if (r > audit.ratio_max || audit.ratios.size() == 1) {
            audit.ratio_max = r;
            audit.argmax = t;
        }
    }
    return audit;
}

std::string to_string(ModerationVerdict v) {
    return v == ModerationVerdict::moderate_consistent ? "moderate-consistent"
                                                       : "non-moderate-evidence";
}

ModerationVerdict is_moderate_numeric(const ModerateFunction& g, const GridSpec& grid,
                                      double growth_threshold) {
    if (!(growth_threshold > 1.0)) throw DomainError("growth_threshold must exceed 1");
    std::map<long, double> decade_max;
    for (double t : grid.values()) {
        if (t < 1.0) continue;
        const long decade = static_cast<long>(std::floor(std::log10(t)));
        const double r = doubling_ratio(g, t);
        auto [it, inserted] = decade_max.emplace(decade, r);
        if (!inserted) it->second = std::max(it->second, r);
    }
    double prev = std::numeric_limits<double>::quiet_NaN();
    for (const auto& [decade, r] : decade_max) {
        if (!std::isfinite(r)) return ModerationVerdict::non_moderate_evidence;
        if (!std::isnan(prev) && r >= growth_threshold * prev) {
            return ModerationVerdict::non_moderate_evidence;
        }
        prev = r;
    }
    return ModerationVerdict::moderate_consistent;
}

namespace {

double log_summand(const ModerateFunction& g, int p, double k) {
    return g.log_value(k) - static_cast<double>(p + 1) * std::log(k);
}

double summand(const ModerateFunction& g, int p, double k) {
    return std::exp(log_summand(g, p, k));
}

} // namespace

bool tail_condition_holds(const ModerateFunction& g, int p) {
    if (p < 1) return false;
    for (double t : {1e6, 1e9}) {
        const double slope = (log_summand(g, p, 2.0 * t) - log_summand(g, p, t)) / std::numbers::ln2;
        if (!(slope < -1.0 - 1e-3)) return false;
    }
    return true;
}

std::optional<int> smallest_admissible_p(const ModerateFunction& g) {
    for (int p = 1; p <= 40; ++p) {
        if (tail_condition_holds(g, p)) return p;
    }
    return std::nullopt;
}

std::vector<double> h_majorant_profile(const ModerateFunction& g, int p,
                                       std::span<const std::size_t> ns) {
    if (p < 1) throw DomainError("h_majorant needs p >= 1");
    if (ns.empty()) return {};
    for (std::size_t n : ns) {
        if (n < 1) throw DomainError("h_majorant needs n >= 1");
    }
    if (!tail_condition_holds(g, p)) {
        throw ConditionViolation("tail condition fails: G(t)/t^(p+1) is not integrable on (1, inf) for p=" +
                                     std::to_string(p) + " and G=" + g.name(),
                                 smallest_admissible_p(g));
    }

    std::vector<std::size_t> sorted(ns.begin(), ns.end());
    std::sort(sorted.begin(), sorted.end());
    sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
    const std::size_t n_lo = sorted.front();
    const std::size_t n_hi = sorted.back();

    // segment[i] = sum of f(k) for sorted[i] <= k < sorted[i+1] (the last one runs
    // to the current cutoff). Tails are then summed from the far end, which
    // avoids cancelling a small tail against the full sum.
    std::vector<CompensatedSum> segment(sorted.size());
    std::size_t next_target = 0;
    std::size_t current = 0;
    std::size_t k = n_lo;

    auto advance_to = [&](std::size_t k_end) {
        for (; k <= k_end; ++k) {
            while (next_target < sorted.size() && sorted[next_target] == k) current = next_target++;
            segment[current].add(summand(g, p, static_cast<double>(k)));
        }
    };

    boost::math::quadrature::exp_sinh<double> half_line;
    auto f = [&](double t) { return summand(g, p, t); };

    constexpr double rel_tol = 1e-9;
    constexpr std::size_t k_cap = std::size_t{1} << 27;
    std::size_t k_end = std::max<std::size_t>(2 * n_hi, 1024);
    for (;;) {
        advance_to(k_end);
        const double K = static_cast<double>(k_end);
        const double fk = f(K);
        const bool decreasing = f(K + 1.0) <= fk && f(2.0 * K) <= fk;
        if (decreasing) {
            // sum_{k > K} f(k) lies in [int_{K+1}^inf f, int_K^inf f].
            const double beyond = half_line.integrate(f, K + 1.0, std::numeric_limits<double>::infinity());
            const double cell = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, K, K + 1.0);
            const double remainder = beyond + 0.5 * cell;
            const double err = 0.5 * cell;
            const double smallest_tail = segment.back().value() + remainder;
            if (err <= rel_tol * smallest_tail) {
                std::vector<double> by_sorted(sorted.size());
                CompensatedSum tail;
                tail.add(remainder);
                for (std::size_t i = sorted.size(); i-- > 0;) {
                    tail.merge(segment[i]);
                    by_sorted[i] = std::exp(p * std::log(static_cast<double>(sorted[i])) + std::log(tail.value()));
                }
                std::vector<double> out;
                out.reserve(ns.size());
                for (std::size_t n : ns) {
                    const auto it = std::lower_bound(sorted.begin(), sorted.end(), n);
                    out.push_back(by_sorted[static_cast<std::size_t>(it - sorted.begin())]);
                }
                return out;
            }
        }
        if (k_end >= k_cap) {
            throw PrecisionError("h_majorant: tail of " + g.name() + " decays too slowly for 1e-9 relative error");
        }
        k_end *= 2;
    }
}

double h_majorant(const ModerateFunction& g, int p, std::size_t n) {
    const std::size_t ns[] = {n};
    return h_majorant_profile(g, p, ns).front();
}

std::vector<std::size_t> integer_points(const GridSpec& grid) {
    std::vector<std::size_t> out;
    for (double t : grid.values()) {
        out.push_back(static_cast<std::size_t>(std::max(1.0, std::round(t))));
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

double h_scaling_constant(const ModerateFunction& g, int p, const GridSpec& grid) {
    const auto ns = integer_points(grid);
    const auto h = h_majorant_profile(g, p, ns);
    double c = 0.0;
    for (std::size_t i = 0; i < ns.size(); ++i) {
        c = std::max(c, h[i] / eval(g, static_cast<double>(ns[i])));
    }
    return c;
}

std::vector<double> counterexample_sequence(const ModerateFunction& g, std::size_t count,
                                            double search_limit,
                                            const CounterexampleSearch& search) {
    if (count == 0) throw DomainError("counterexample_sequence needs count >= 1");
    if (!(search.start > 0.0) || !(search.ratio > 1.0)) {
        throw DomainError("counterexample search grid needs start > 0 and ratio > 1");
    }
    if (!(search_limit >= search.start)) throw DomainError("search_limit below grid start");

    auto admissible = [&](double t, std::size_t n) {
        const double hi = g.value(2.0 * t);
        const double lo = g.value(t);
        const double nn = static_cast<double>(n);
        if (std::isfinite(hi) && std::isfinite(lo) && std::isfinite(nn * lo)) return hi >= nn * lo;
        return g.log_value(2.0 * t) - g.log_value(t) >= std::log(nn);
    };
    auto grid_point = [&](std::size_t k) {
        return search.start * std::pow(search.ratio, static_cast<double>(k));
    };

    std::vector<double> ts;
    ts.reserve(count);
    double prev = 0.0;
    std::size_t k = 0;
    for (std::size_t n = 1; n <= count; ++n) {
        // Points rejected for n-1 stay rejected for n, so k never moves back.
        while (grid_point(k) <= search_limit && (grid_point(k) <= prev || !admissible(grid_point(k), n))) {
            ++k;
        }
        const double hit = grid_point(k);
        if (hit > search_limit) {
            throw NotFound("no t with G(2t) >= " + std::to_string(n) + " G(t) up to " +
                               std::to_string(search_limit) + " for " + g.name(),
                           n - 1);
        }
        double t = hit;
        if (k > 0) {
            double lo = std::max(prev, grid_point(k - 1));
            double hi = hit;
            for (int it = 0; it < 200 && hi - lo > 1e-13 * hi; ++it) {
                const double mid = 0.5 * (lo + hi);
                if (mid <= lo || mid >= hi) break;
                if (admissible(mid, n)) hi = mid; else lo = mid;
            }
            t = hi;
        }
        ts.push_back(t);
        prev = t;
    }
    return ts;
}

} // namespace bklab
