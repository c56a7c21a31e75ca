#ifndef BKLAB_MODFUN_HPP
#define BKLAB_MODFUN_HPP

#include <cstddef>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace bklab {

enum class Spacing { linear, geometric };

struct GridSpec {
    double t_min = 0.0;
    double t_max = 1.0;
    std::size_t points = 2;
    Spacing spacing = Spacing::geometric;

    // Throws DomainError unless t_min < t_max, points >= 2, and geometric grids start above 0.
    void validate() const;
    std::vector<double> values() const;
};

GridSpec geometric_grid(double t_min, double t_max, std::size_t points);
GridSpec linear_grid(double t_min, double t_max, std::size_t points);

enum class Family { power, powlog, exponential, custom };

// A candidate function G on [0, inf): positive, nondecreasing, with optional
// metadata asserting moderation and a global doubling constant c with
// G(2t) <= c G(t).
//
// Built-in families:
//   power:r=R        (1+t)^R                     doubling constant 2^R
//   powlog:r=R,s=S   (1+t)^R log(e+t)^S          doubling constant 2^R (1+log 2)^S
//   exp:b=B          exp(B t)                    not moderate
//   const            the constant 1 (power with R=0)
// Any of them may be dilated, t -> G(k t).
class ModerateFunction {
public:
    static ModerateFunction power(double r);
    static ModerateFunction powlog(double r, double s);
    static ModerateFunction exponential(double b);
    static ModerateFunction constant();
    static ModerateFunction custom(std::string name, std::function<double(double)> fn,
                                   std::optional<double> claimed_doubling, bool claimed_moderate);

    // Parses "power:r=2", "powlog:r=1,s=1", "exp:b=0.5", "exp" (b=1), "const".
    static ModerateFunction parse(std::string_view spec);

    // t -> G(factor * t). Doubling metadata carries over unchanged.
    ModerateFunction dilated(double factor) const;

    // Unchecked evaluation for hot loops; callers guarantee t >= 0.
    double value(double t) const noexcept;
    // log G(t); stays finite where G itself overflows.
    double log_value(double t) const noexcept;

    Family family() const noexcept { return family_; }
    const std::string& name() const noexcept { return name_; }
    const std::map<std::string, double>& params() const noexcept { return params_; }
    std::optional<double> claimed_doubling() const noexcept { return claimed_doubling_; }
    bool claimed_moderate() const noexcept { return claimed_moderate_; }
    bool is_constant() const noexcept;

    // Exact sup_t G(2t)/G(t) where known in closed form (power family).
    std::optional<double> analytic_doubling_sup() const noexcept;

private:
    ModerateFunction() = default;

    Family family_ = Family::power;
    std::string name_;
    std::map<std::string, double> params_;
    double r_ = 0.0;
    double s_ = 0.0;
    double b_ = 0.0;
    double scale_ = 1.0;
    std::function<double(double)> fn_;
    std::optional<double> claimed_doubling_;
    bool claimed_moderate_ = false;
};

// Checked evaluation: DomainError for negative or non-finite t, or if G(t) is not positive.
double eval(const ModerateFunction& g, double t);

struct DoublingAudit {
    double ratio_max = 0.0;
    double argmax = 0.0;
    std::optional<double> analytic_sup;
    std::vector<double> grid;
    std::vector<double> ratios;
};

// max over grid points of G(2t)/G(t), plus the closed-form supremum when known.
DoublingAudit doubling_ratio_sup(const ModerateFunction& g, const GridSpec& grid);

enum class ModerationVerdict { moderate_consistent, non_moderate_evidence };
std::string to_string(ModerationVerdict v);

// Numerical evidence only. Grid points t >= 1 are grouped by decade; the
// verdict is non-moderate-evidence iff the largest doubling ratio of some
// decade exceeds that of the previous decade by a factor >= growth_threshold.
ModerationVerdict is_moderate_numeric(const ModerateFunction& g, const GridSpec& grid,
                                      double growth_threshold = 10.0);

// Ratio test on k -> G(k) k^-(p+1): true when the summand decays faster than 1/k.
bool tail_condition_holds(const ModerateFunction& g, int p);
// Smallest p in [1, 40] passing tail_condition_holds, if any.
std::optional<int> smallest_admissible_p(const ModerateFunction& g);

// n^p sum_{k>=n} G(k) k^-(p+1), relative error <= 1e-9. Throws ConditionViolation
// when the tail series diverges.
double h_majorant(const ModerateFunction& g, int p, std::size_t n);

// h_majorant for several n in one summation pass; ns need not be sorted.
std::vector<double> h_majorant_profile(const ModerateFunction& g, int p,
                                       std::span<const std::size_t> ns);

// Integer points of a grid (rounded, clamped to >= 1, deduplicated, ascending).
std::vector<std::size_t> integer_points(const GridSpec& grid);

// max over integer grid points n of h_majorant(G, p, n) / G(n).
double h_scaling_constant(const ModerateFunction& g, int p, const GridSpec& grid);

struct CounterexampleSearch {
    double start = 1e-3;
    double ratio = 1.01;
};

// Increasing t_1 < t_2 < ... with G(2 t_n) >= n G(t_n). The search walks a
// geometric grid; when the first admissible grid point lies past t_{n-1} by
// more than needed, the crossing is refined by bisection inside that grid cell.
// Throws NotFound (carrying the last n reached) once the grid passes search_limit.
std::vector<double> counterexample_sequence(const ModerateFunction& g, std::size_t count,
                                            double search_limit,
                                            const CounterexampleSearch& search = {});

} // namespace bklab

#endif
