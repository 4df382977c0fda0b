#pragma once

#include "spine/config.hpp"
#include "spine/montecarlo.hpp"

#include <array>
#include <iosfwd>
#include <numbers>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace spine {

enum class Mode { Table51, Table52, Field, Single, Validate };
enum class Engine { Formula, Fem, RobinFem, Mc };

std::string_view to_string(Mode m);
std::string_view to_string(Engine e);
Mode parse_mode(std::string_view s);
/// Comma separated, e.g. "formula,fem"; throws ConfigError.
std::vector<Engine> parse_engines(std::string_view list);
std::vector<double> parse_number_list(std::string_view list);

struct RunSpec {
    Mode mode = Mode::Single;
    GeometryConfig geometry{};
    std::vector<Engine> engines{Engine::Formula, Engine::Fem, Engine::RobinFem};
    std::vector<Vec2> points; // single mode; empty means the head centre
    /// Mesh sizes as multiples of eps, strictly decreasing.
    std::vector<double> h_factors{0.4, 0.2, 0.1};
    WalkConfig mc{};
    int grid = 50;
    int precision = 6;
    bool timestamp = true;
    std::vector<std::string> skip; // validate groups: kernel, phi, fem, table, mc
    std::string reference_dir;     // empty: the bundled data directory
    /// Arc radius convention of the curved-neck table geometry.
    ArcRadii table52_radii = ArcRadii::InnerWall;
    /// (eps, l, r1, r2) rows for table52; empty means table52_grid().
    std::vector<std::array<double, 4>> curved_rows;
    /// Value the kernel check expects for the double log integral.
    double kernel_reference = 4.0 * std::numbers::ln2 - 6.0;
    std::string config_echo; // extra '#' metadata lines
};

bool has_engine(const RunSpec& s, Engine e);

/// One row of a comparison table. Differences are always recomputed from the
/// values; the printed reference differences are kept only to flag sign
/// disagreements with the reference values themselves.
struct ComparisonRow {
    double eps = 0.0;
    double L = 0.0;      // absolute neck length
    double L_eff = 0.0;  // effective neck length
    std::optional<double> l, r1, r2; // curved rows
    std::optional<double> u_r, u_eps, u, mc, mc_stderr;
    std::optional<double> ref_u_r, ref_u_eps, ref_u;
    std::optional<double> ref_printed_eps_minus_r, ref_printed_u_minus_eps;
    std::string note;

    double order_eps() const { return eps; }
    std::optional<double> eps_minus_r() const;
    std::optional<double> u_minus_eps() const;
    std::optional<double> delta_u_r() const;   // u_r - ref_u_r
    std::optional<double> delta_u_eps() const; // u_eps - ref_u_eps
    std::optional<double> delta_u() const;     // u - ref_u
    /// Names of printed reference differences whose sign disagrees with the
    /// reference values, separated by ';'.
    std::string reference_sign_flags() const;
};

struct ReferenceRow {
    double eps = 0.0, L = 0.0;
    std::optional<double> l, r1, r2;
    std::optional<double> u_r, u_eps, u, printed_eps_minus_r, printed_u_minus_eps;
};

/// Reads a bundled reference table. Columns are named in the header; '#'
/// lines are comments; empty cells are missing values.
std::vector<ReferenceRow> read_reference(const std::string& path);
std::string default_reference_dir();

/// Parameter grids of the two comparison tables.
std::vector<std::pair<double, double>> table51_grid();            // (eps, L)
std::vector<std::array<double, 4>> table52_grid();                // (eps, l, r1, r2)

std::vector<ComparisonRow> run_table51(const RunSpec& spec);
std::vector<ComparisonRow> run_table52(const RunSpec& spec);

/// eps,L,l,r1,r2,L_eff,u_r,u_eps,u_eps_minus_u_r,u,u_minus_u_eps,order_eps,
/// mc,mc_stderr,ref_u_r,ref_u_eps,ref_u,delta_u_r,delta_u_eps,delta_u,
/// ref_sign_flag,note
void write_comparison_csv(std::ostream& os, const std::vector<ComparisonRow>& rows, int precision);
/// Inverse of write_comparison_csv; derived columns are ignored on input.
std::vector<ComparisonRow> read_comparison_csv(std::istream& is);

struct GridPoint {
    Vec2 p;
    bool masked = false; // within 5 eps of the window centre
    std::optional<double> value;
    std::optional<double> stderr_;
};

struct FieldLayer {
    Engine engine;
    std::vector<GridPoint> points;
};

struct FieldResult {
    std::vector<Vec2> grid; // interior grid points, row-major
    std::vector<bool> mask;
    std::vector<FieldLayer> layers;
};

/// Samples formula (head only), fem (finest mesh size) and mc on a grid x grid
/// lattice over the domain's bounding box, keeping interior points. Throws
/// EmptyGrid if no lattice point is interior.
FieldResult run_field(const RunSpec& spec);

/// "x,y,value,mask" (mc adds stderr).
void write_field_layer_csv(std::ostream& os, const FieldLayer& layer, int precision);
/// "x,y,difference,mask" over points where both layers have values (a - b).
void write_field_difference_csv(std::ostream& os, const FieldLayer& a, const FieldLayer& b, int precision);
/// Largest |a - b| over unmasked points both layers cover.
double max_unmasked_difference(const FieldLayer& a, const FieldLayer& b);

struct SingleResult {
    Vec2 p;
    std::optional<double> formula, fem, robin_fem, mc, mc_stderr;
    std::optional<double> fem_order, robin_order;
    std::string note;
};

std::vector<SingleResult> run_single(const RunSpec& spec);
/// "x,y,formula,fem,fem_order,robin_fem,robin_order,mc,mc_stderr,note"
void write_single_csv(std::ostream& os, const std::vector<SingleResult>& rows, int precision);

enum class CheckStatus { Pass, Fail, Skipped };

struct CheckResult {
    std::string group;
    std::string name;
    CheckStatus status = CheckStatus::Pass;
    double measured = 0.0;
    double tolerance = 0.0;
    std::string detail;
};

struct ValidationReport {
    std::vector<CheckResult> checks;
    bool passed() const;
};

ValidationReport run_validate(const RunSpec& spec);
void write_report(std::ostream& os, const ValidationReport& r);

/// '#' metadata block: tool version, optional timestamp, mode, geometry and
/// engine settings.
void write_metadata(std::ostream& os, const RunSpec& spec);
std::string version_string();

} // namespace spine
