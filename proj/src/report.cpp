#include "bklab/report.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include "bklab/errors.hpp"

namespace bklab {

namespace {

void write(std::ostringstream& os, const Json& j, int depth) {
    const std::string pad(static_cast<std::size_t>(2 * (depth + 1)), ' ');
    const std::string close(static_cast<std::size_t>(2 * depth), ' ');
    switch (j.type()) {
    case Json::value_t::object: {
        if (j.empty()) {
            os << "{}";
            return;
        }
        os << "{\n";
        bool first = true;
        for (auto it = j.begin(); it != j.end(); ++it) {
            if (!first) os << ",\n";
            first = false;
            os << pad << Json(it.key()).dump() << ": ";
            write(os, it.value(), depth + 1);
        }
        os << "\n" << close << "}";
        return;
    }
    case Json::value_t::array: {
        if (j.empty()) {
            os << "[]";
            return;
        }
        // Flat arrays of scalars stay on one line.
        bool flat = true;
        for (const auto& v : j) flat = flat && !v.is_structured();
        os << (flat ? "[" : "[\n");
        bool first = true;
        for (const auto& v : j) {
            if (!first) os << (flat ? ", " : ",\n");
            first = false;
            if (!flat) os << pad;
            write(os, v, depth + 1);
        }
        os << (flat ? "]" : "\n" + close + "]");
        return;
    }
    case Json::value_t::number_float: {
        const double x = j.get<double>();
        if (std::isfinite(x)) {
            os << format_double(x);
        } else {
            os << '"' << format_double(x) << '"';
        }
        return;
    }
    default:
        os << j.dump();
    }
}

Json opt(const std::optional<double>& x) { return x ? Json(*x) : Json(nullptr); }

} // namespace

Format parse_format(const std::string& s) {
    if (s == "json") return Format::json;
    if (s == "csv") return Format::csv;
    throw ConfigError("unknown format '" + s + "' (json or csv)");
}

std::string format_double(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

std::string emit_json(const Json& j) {
    std::ostringstream os;
    write(os, j, 0);
    os << '\n';
    return os.str();
}

Json envelope(const std::string& kind, std::uint64_t seed, Json result) {
    Json j;
    j["schema_version"] = schema_version;
    j["kind"] = kind;
    j["seed"] = seed;
    j["result"] = std::move(result);
    return j;
}

Json to_json(const BoundReport& r) {
    Json j;
    j["name"] = r.name;
    j["lhs"] = r.lhs;
    j["lhs_se"] = r.lhs_se;
    j["rhs"] = r.rhs;
    j["rhs_se"] = r.rhs_se;
    j["slack"] = r.slack();
    j["holds_within"] = r.holds_within();
    j["seed"] = r.seed;
    j["dist"] = r.dist;
    j["G"] = r.g;
    if (!r.detail.empty()) j["detail"] = r.detail;
    Json params = Json::object();
    for (const auto& [k, v] : r.params) params[k] = v;
    j["params"] = params;
    j["lhs_exact"] = r.lhs_exact;
    j["degraded"] = r.degraded;
    j["passed"] = r.passed();
    j["note"] = r.note;
    return j;
}

Json to_json(const LastExitEstimate& e) {
    Json j;
    j["a"] = e.a;
    j["mean"] = e.mean;
    j["se"] = e.se;
    j["censor_rate"] = e.censor_rate;
    j["replicates"] = e.replicates;
    j["horizon"] = e.horizon;
    j["seed"] = e.seed;
    j["mean_quarter_horizon"] = e.mean_quarter;
    j["mean_half_horizon"] = e.mean_half;
    j["verdict"] = series_label(lastexit_verdict(e));
    j["degraded"] = e.degraded;
    j["warning"] = e.warning;
    return j;
}

Json to_json(const SeriesEstimate& e) {
    Json j;
    j["a"] = e.a;
    j["n_max"] = e.n_max;
    j["replicates"] = e.replicates;
    j["seed"] = e.seed;
    j["exact_through"] = e.exact_through;
    j["partial_sum"] = e.partial_sum;
    j["partial_se"] = e.partial_se;
    j["tail_bound"] = opt(e.tail_bound);
    j["verdict"] = series_label(e.verdict);
    Json blocks = Json::array();
    for (const auto& b : e.blocks) {
        Json bj;
        bj["block"] = b.index;
        bj["n_lo"] = b.n_lo;
        bj["n_hi"] = b.n_hi;
        bj["contribution"] = b.contribution;
        bj["se"] = b.se;
        bj["complete"] = b.complete;
        blocks.push_back(bj);
    }
    j["blocks"] = blocks;
    return j;
}

std::string to_string(MomentMode m) {
    switch (m) {
    case MomentMode::automatic: return "automatic";
    case MomentMode::analytic: return "analytic";
    case MomentMode::quadrature: return "quadrature";
    case MomentMode::partial_sum: return "partial_sum";
    case MomentMode::monte_carlo: return "monte_carlo";
    }
    return "unknown";
}

Json to_json(const MomentResult& m) {
    Json j;
    j["value"] = m.value;
    j["se"] = m.se;
    j["verdict"] = moment_label(m.verdict);
    j["mode"] = to_string(m.mode_used);
    j["blocks"] = m.blocks;
    if (m.mode_used == MomentMode::partial_sum) {
        j["terms"] = m.terms;
        j["last_increment"] = m.last_increment;
        j["remainder_bound"] = m.remainder_bound;
    }
    return j;
}

Json to_json(const DoublingAudit& a) {
    Json j;
    j["ratio_max"] = a.ratio_max;
    j["argmax"] = a.argmax;
    j["analytic_sup"] = opt(a.analytic_sup);
    j["grid_points"] = a.grid.size();
    return j;
}

Json to_json(const CompositionCount& c) {
    Json j;
    j["count"] = c.count.str();
    j["enumerated"] = c.enumerated ? Json(c.enumerated->str()) : Json(nullptr);
    j["note"] = c.note;
    return j;
}

Json to_json(const SweepRow& r) {
    Json j;
    j["target_error"] = r.target_error;
    j["c"] = r.c;
    j["mean_G_tau"] = r.mean_G_tau;
    j["se"] = r.se;
    j["reference_G"] = r.reference_G;
    j["ratio"] = r.ratio;
    j["censor_rate"] = r.censor_rate;
    return j;
}

Json to_json(const ErrorEstimate& e) {
    Json j;
    j["error_rate"] = opt(e.error_rate);
    j["se"] = e.se;
    j["censor_rate"] = e.censor_rate;
    j["reps"] = e.reps;
    return j;
}

Json to_json(const RejectionEstimate& e) {
    Json j;
    j["rate"] = e.rate;
    j["se"] = e.se;
    j["bound"] = e.bound;
    j["holds_within"] = e.holds_within();
    j["reps"] = e.reps;
    return j;
}

Json to_json(const GMomentEstimate& e) {
    Json j;
    j["mean"] = e.mean;
    j["se"] = e.se;
    j["censor_rate"] = e.censor_rate;
    j["degraded"] = e.degraded;
    j["reps"] = e.reps;
    return j;
}

std::string sweep_csv(std::span<const SweepRow> rows) {
    std::string out = "target_error,c,mean_G_tau,reference_G,ratio\n";
    for (const auto& r : rows) {
        out += format_double(r.target_error) + ',' + format_double(r.c) + ',' + format_double(r.mean_G_tau) + ',' +
               format_double(r.reference_G) + ',' + format_double(r.ratio) + '\n';
    }
    return out;
}

std::string series_csv(const SeriesEstimate& e) {
    std::string out = "block,n_lo,n_hi,contribution,se\n";
    for (const auto& b : e.blocks) {
        out += std::to_string(b.index) + ',' + std::to_string(b.n_lo) + ',' + std::to_string(b.n_hi) + ',' +
               format_double(b.contribution) + ',' + format_double(b.se) + '\n';
    }
    return out;
}

std::string atoms_csv(std::span<const Atom> atoms) {
    std::string out = "atom,mass\n";
    for (const auto& a : atoms) out += format_double(a.value) + ',' + format_double(a.mass) + '\n';
    return out;
}

} // namespace bklab
