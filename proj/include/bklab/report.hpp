#ifndef BKLAB_REPORT_HPP
#define BKLAB_REPORT_HPP

#include <cstdint>
#include <span>
#include <string>

#include "json.hpp"

#include "bklab/bounds_audit.hpp"
#include "bklab/combinatorics.hpp"
#include "bklab/dist.hpp"
#include "bklab/lln_sim.hpp"
#include "bklab/modfun.hpp"
#include "bklab/seqtest.hpp"

namespace bklab {

inline constexpr int schema_version = 1;

using Json = nlohmann::ordered_json;

enum class Format { json, csv };
Format parse_format(const std::string& s);

// %.17g; non-finite values as inf, -inf, nan.
std::string format_double(double x);

// Pretty JSON with keys in insertion order and every float at 17 significant
// digits. Non-finite floats become the strings "inf", "-inf", "nan".
std::string emit_json(const Json& j);

// {"schema_version", "kind", "seed", "result"}.
Json envelope(const std::string& kind, std::uint64_t seed, Json result);

Json to_json(const BoundReport& r);
Json to_json(const LastExitEstimate& e);
Json to_json(const SeriesEstimate& e);
Json to_json(const MomentResult& m);
Json to_json(const DoublingAudit& a);
Json to_json(const CompositionCount& c);
Json to_json(const SweepRow& r);
Json to_json(const ErrorEstimate& e);
Json to_json(const RejectionEstimate& e);
Json to_json(const GMomentEstimate& e);

std::string to_string(MomentMode m);

std::string sweep_csv(std::span<const SweepRow> rows);
std::string series_csv(const SeriesEstimate& e);
std::string atoms_csv(std::span<const Atom> atoms);

} // namespace bklab

#endif
