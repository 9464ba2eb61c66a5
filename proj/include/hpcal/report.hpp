#pragma once

// Level deviations from nominal for OCV- and HATS-calibrated playback,
// their summary statistics and the tabular renderings of both.

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace hpcal {

struct TrackLevels {
    std::string track_id;
    double nominal_dba = 0.0;
    std::optional<double> ocv_dba;
    std::optional<double> hats_dba;

    void validate() const;
};

// Signed deviation of a reproduced level from nominal.
double delta(double measured_dba, double nominal_dba);

enum class Method { Ocv, Hats };

struct DeltaRow {
    TrackLevels levels;
    std::optional<double> delta_ocv;
    std::optional<double> delta_hats;

    std::optional<double> delta_for(Method m) const { return m == Method::Ocv ? delta_ocv : delta_hats; }
};

// "(+)" for a positive deviation, "(−)" for a negative one, empty for zero.
std::string_view sign_marker(double delta_db);

struct Exclusion {
    std::string track_id;
    std::string reason;
};

// Statistics of |delta| over the rows carrying that method's level.
struct AbsDeltaStats {
    std::size_t count = 0;
    double min = 0.0;
    double max = 0.0;
    double mean = 0.0;
    // Sample standard deviation (n - 1); NaN for a single value.
    double stddev = 0.0;
};

class DeltaReport {
public:
    DeltaReport(std::vector<DeltaRow> rows, std::vector<Exclusion> exclusions);

    const std::vector<DeltaRow>& rows() const { return rows_; }
    const std::vector<Exclusion>& exclusions() const { return exclusions_; }
    bool is_excluded(std::string_view track_id) const;

    std::optional<AbsDeltaStats> stats(Method method) const;
    std::optional<AbsDeltaStats> stats_without_exclusions(Method method) const;

private:
    std::vector<DeltaRow> rows_;
    std::vector<Exclusion> exclusions_;
};

std::optional<AbsDeltaStats> abs_delta_stats(const std::vector<double>& deltas);

// Throws std::invalid_argument when rows is empty, when an exclusion names an
// unknown track, or when exclusions remove every row.
DeltaReport summarize(const std::vector<TrackLevels>& rows, const std::vector<Exclusion>& exclusions = {});

enum class Format { Csv, Markdown };

Format parse_format(std::string_view text);

// Rows ascending by |delta_ocv| (rows without an OCV level last), ties by track_id.
std::vector<DeltaRow> sorted_rows(const DeltaReport& report);

std::string render(const DeltaReport& report, Format format);
std::string render_stats(const DeltaReport& report);

// Reads the columns track_id, L_nom and optionally L_ocv, L_hats. Delta
// columns, if present, are ignored: deltas are always recomputed.
std::vector<TrackLevels> parse_levels_csv(std::string_view text);

// Fixed two-decimal formatting used by every tabular output; never prints "-0.00".
std::string format_db(double value);

namespace golden {

// One row of the published comparison table, in its printed order.
struct Table2Row {
    std::string_view track_id;
    double nominal;
    double ocv;
    double hats;
    double delta_ocv;
    double delta_hats;
};

extern const std::array<Table2Row, 27> kTable2;

std::vector<TrackLevels> table2_levels();

}  // namespace golden

}  // namespace hpcal
