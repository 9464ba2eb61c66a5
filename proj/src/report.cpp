#include "hpcal/report.hpp"

#include "hpcal/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

namespace hpcal {

void TrackLevels::validate() const {
    if (!std::isfinite(nominal_dba)) throw std::invalid_argument("track '" + track_id + "': nominal level not finite");
    if (!ocv_dba && !hats_dba) throw std::invalid_argument("track '" + track_id + "' has no measured level");
}

double delta(double measured_dba, double nominal_dba) { return measured_dba - nominal_dba; }

std::string_view sign_marker(double delta_db) {
    if (delta_db > 0.0) return "(+)";
    if (delta_db < 0.0) return "(−)";
    return "";
}

std::optional<AbsDeltaStats> abs_delta_stats(const std::vector<double>& deltas) {
    if (deltas.empty()) return std::nullopt;
    AbsDeltaStats s;
    s.count = deltas.size();
    s.min = std::numeric_limits<double>::infinity();
    s.max = -s.min;
    double sum = 0.0;
    for (double d : deltas) {
        const double a = std::abs(d);
        s.min = std::min(s.min, a);
        s.max = std::max(s.max, a);
        sum += a;
    }
    s.mean = sum / static_cast<double>(s.count);
    if (s.count < 2) {
        s.stddev = std::numeric_limits<double>::quiet_NaN();
    } else {
        double ss = 0.0;
        for (double d : deltas) ss += (std::abs(d) - s.mean) * (std::abs(d) - s.mean);
        s.stddev = std::sqrt(ss / static_cast<double>(s.count - 1));
    }
    return s;
}

DeltaReport::DeltaReport(std::vector<DeltaRow> rows, std::vector<Exclusion> exclusions)
    : rows_(std::move(rows)), exclusions_(std::move(exclusions)) {}

bool DeltaReport::is_excluded(std::string_view track_id) const {
    return std::any_of(exclusions_.begin(), exclusions_.end(),
                       [&](const Exclusion& e) { return e.track_id == track_id; });
}

std::optional<AbsDeltaStats> DeltaReport::stats(Method method) const {
    std::vector<double> d;
    for (const auto& r : rows_)
        if (auto v = r.delta_for(method)) d.push_back(*v);
    return abs_delta_stats(d);
}

std::optional<AbsDeltaStats> DeltaReport::stats_without_exclusions(Method method) const {
    std::vector<double> d;
    for (const auto& r : rows_)
        if (auto v = r.delta_for(method); v && !is_excluded(r.levels.track_id)) d.push_back(*v);
    return abs_delta_stats(d);
}

DeltaReport summarize(const std::vector<TrackLevels>& rows, const std::vector<Exclusion>& exclusions) {
    if (rows.empty()) throw std::invalid_argument("no rows to summarize");
    std::set<std::string> ids;
    std::vector<DeltaRow> out;
    out.reserve(rows.size());
    for (const auto& levels : rows) {
        levels.validate();
        if (!ids.insert(levels.track_id).second)
            throw std::invalid_argument("duplicate track '" + levels.track_id + "'");
        DeltaRow row{levels, std::nullopt, std::nullopt};
        if (levels.ocv_dba) row.delta_ocv = delta(*levels.ocv_dba, levels.nominal_dba);
        if (levels.hats_dba) row.delta_hats = delta(*levels.hats_dba, levels.nominal_dba);
        out.push_back(std::move(row));
    }
    std::set<std::string> excluded;
    for (const auto& e : exclusions) {
        if (!ids.contains(e.track_id)) throw std::invalid_argument("excluded track '" + e.track_id + "' is not in the input");
        excluded.insert(e.track_id);
    }
    if (excluded.size() == ids.size()) throw std::invalid_argument("every row is excluded");
    return DeltaReport(std::move(out), exclusions);
}

Format parse_format(std::string_view text) {
    if (text == "csv") return Format::Csv;
    if (text == "md" || text == "markdown") return Format::Markdown;
    throw std::invalid_argument("unknown format '" + std::string(text) + "'");
}

std::string format_db(double value) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.2f", value);
    std::string s = buf;
    if (s == "-0.00") s = "0.00";
    return s;
}

std::vector<DeltaRow> sorted_rows(const DeltaReport& report) {
    std::vector<DeltaRow> rows = report.rows();
    auto key = [](const DeltaRow& r) {
        return r.delta_ocv ? std::abs(*r.delta_ocv) : std::numeric_limits<double>::infinity();
    };
    std::stable_sort(rows.begin(), rows.end(), [&](const DeltaRow& a, const DeltaRow& b) {
        const double ka = key(a), kb = key(b);
        if (ka != kb) return ka < kb;
        return a.levels.track_id < b.levels.track_id;
    });
    return rows;
}

namespace {

std::string opt_db(const std::optional<double>& v) { return v ? format_db(*v) : std::string(); }

std::string csv_field(std::string_view text) {
    if (text.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(text);
    std::string out = "\"";
    for (char c : text) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

std::vector<std::vector<std::string>> parse_csv_records(std::string_view text) {
    std::vector<std::vector<std::string>> records;
    std::vector<std::string> record;
    std::string field;
    bool quoted = false;
    bool field_started = false;
    for (std::size_t i = 0; i < text.size(); ++i) {
        const char c = text[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < text.size() && text[i + 1] == '"') {
                    field += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                field += c;
            }
            continue;
        }
        if (c == '"' && field.empty()) {
            quoted = true;
            field_started = true;
        } else if (c == ',') {
            record.push_back(std::move(field));
            field.clear();
            field_started = true;
        } else if (c == '\n' || c == '\r') {
            if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') ++i;
            if (field_started || !field.empty() || !record.empty()) {
                record.push_back(std::move(field));
                records.push_back(std::move(record));
            }
            record.clear();
            field.clear();
            field_started = false;
        } else {
            field += c;
            field_started = true;
        }
    }
    if (quoted) throw std::invalid_argument("unterminated quoted CSV field");
    if (field_started || !field.empty() || !record.empty()) {
        record.push_back(std::move(field));
        records.push_back(std::move(record));
    }
    return records;
}

std::optional<double> parse_optional_number(const std::string& s, std::size_t line) {
    if (s.empty()) return std::nullopt;
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(s, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used != s.size() || !std::isfinite(v))
        throw std::invalid_argument("line " + std::to_string(line) + ": '" + s + "' is not a number");
    return v;
}

void append_stats_line(std::ostringstream& out, std::string_view label, const std::optional<AbsDeltaStats>& s) {
    out << label << ": ";
    if (!s) {
        out << "n/a\n";
        return;
    }
    out << "n=" << s->count << " min " << format_db(s->min) << " max " << format_db(s->max) << " mean "
        << format_db(s->mean) << " std " << (std::isnan(s->stddev) ? std::string("n/a") : format_db(s->stddev))
        << " dB\n";
}

}  // namespace

std::string render(const DeltaReport& report, Format format) {
    std::ostringstream out;
    const auto rows = sorted_rows(report);
    if (format == Format::Csv) {
        out << "track_id,L_nom,L_ocv,L_hats,D_ocv,D_hats\n";
        for (const auto& r : rows) {
            out << csv_field(r.levels.track_id) << ',' << format_db(r.levels.nominal_dba) << ','
                << opt_db(r.levels.ocv_dba) << ',' << opt_db(r.levels.hats_dba) << ',' << opt_db(r.delta_ocv) << ','
                << opt_db(r.delta_hats) << '\n';
        }
        return out.str();
    }

    out << "| Track | L_nom | L_ocv | L_hats | D_ocv | D_hats |\n";
    out << "|---|---:|---:|---:|---:|---:|\n";
    for (const auto& r : rows) {
        std::string label = r.levels.track_id;
        const auto shown = r.delta_ocv ? r.delta_ocv : r.delta_hats;
        if (shown && !sign_marker(*shown).empty()) label += " " + std::string(sign_marker(*shown));
        if (report.is_excluded(r.levels.track_id)) label += " *";
        out << "| " << label << " | " << format_db(r.levels.nominal_dba) << " | " << opt_db(r.levels.ocv_dba)
            << " | " << opt_db(r.levels.hats_dba) << " | " << opt_db(r.delta_ocv) << " | " << opt_db(r.delta_hats)
            << " |\n";
    }
    out << "\n" << render_stats(report);
    return out.str();
}

std::string render_stats(const DeltaReport& report) {
    std::ostringstream out;
    append_stats_line(out, "|D_ocv| all tracks", report.stats(Method::Ocv));
    append_stats_line(out, "|D_hats| all tracks", report.stats(Method::Hats));
    if (!report.exclusions().empty()) {
        append_stats_line(out, "|D_ocv| without exclusions", report.stats_without_exclusions(Method::Ocv));
        append_stats_line(out, "|D_hats| without exclusions", report.stats_without_exclusions(Method::Hats));
        for (const auto& e : report.exclusions()) out << "excluded " << e.track_id << ": " << e.reason << "\n";
    }
    return out.str();
}

std::vector<TrackLevels> parse_levels_csv(std::string_view text) {
    const auto records = parse_csv_records(text);
    if (records.empty()) throw std::invalid_argument("levels CSV is empty");
    std::map<std::string, std::size_t> col;
    for (std::size_t i = 0; i < records[0].size(); ++i) col[records[0][i]] = i;
    for (const char* required : {"track_id", "L_nom"})
        if (!col.contains(required)) throw std::invalid_argument(std::string("levels CSV lacks column ") + required);

    auto cell = [&](const std::vector<std::string>& rec, const char* name) -> std::string {
        auto it = col.find(name);
        if (it == col.end() || it->second >= rec.size()) return {};
        return rec[it->second];
    };

    std::vector<TrackLevels> out;
    for (std::size_t i = 1; i < records.size(); ++i) {
        const auto& rec = records[i];
        if (rec.size() != records[0].size())
            throw std::invalid_argument("line " + std::to_string(i + 1) + ": expected " +
                                        std::to_string(records[0].size()) + " fields");
        TrackLevels t;
        t.track_id = cell(rec, "track_id");
        const auto nominal = parse_optional_number(cell(rec, "L_nom"), i + 1);
        if (!nominal) throw std::invalid_argument("line " + std::to_string(i + 1) + ": missing L_nom");
        t.nominal_dba = *nominal;
        t.ocv_dba = parse_optional_number(cell(rec, "L_ocv"), i + 1);
        t.hats_dba = parse_optional_number(cell(rec, "L_hats"), i + 1);
        out.push_back(std::move(t));
    }
    return out;
}

namespace golden {

// clang-format off
const std::array<Table2Row, 27> kTable2 = {{
    {"E11b",  85.94, 88.86, 85.87,  2.92, -0.07},
    {"VP01b", 47.95, 44.70, 47.86, -3.25, -0.10},
    {"E02",   71.69, 67.40, 71.51, -4.29, -0.17},
    {"E01b",  66.74, 62.24, 66.71, -4.50, -0.03},
    {"OS01c", 76.17, 71.34, 76.15, -4.83, -0.02},
    {"HR01",  73.42, 78.54, 73.40,  5.12, -0.01},
    {"RPJ01", 50.57, 55.98, 50.98,  5.41,  0.41},
    {"E05",   60.55, 55.06, 60.40, -5.49, -0.15},
    {"W09",   83.06, 77.07, 82.96, -5.99, -0.09},
    {"W16",   52.45, 46.39, 52.82, -6.06,  0.37},
    {"CT301", 84.91, 91.08, 84.89,  6.17, -0.03},
    {"E10",   75.38, 69.07, 75.36, -6.31, -0.02},
    {"E09",   67.93, 61.60, 67.88, -6.34, -0.05},
    {"W01",   73.09, 66.74, 72.66, -6.36, -0.44},
    {"OS01d", 83.20, 76.78, 83.15, -6.43, -0.05},
    {"W06",   61.83, 55.40, 61.67, -6.44, -0.16},
    {"E12b",  76.24, 83.03, 76.15,  6.79, -0.09},
    {"W15",   64.92, 58.06, 64.84, -6.86, -0.08},
    {"W22",   59.82, 52.72, 59.51, -7.10, -0.31},
    {"CG04",  64.00, 56.86, 63.88, -7.14, -0.13},
    {"N1",    55.25, 62.64, 55.34,  7.39,  0.09},
    {"W11a",  66.02, 58.62, 65.94, -7.39, -0.07},
    {"CG07",  67.04, 58.97, 66.96, -8.07, -0.08},
    {"CG01",  73.34, 65.19, 73.27, -8.15, -0.07},
    {"W23a",  59.90, 51.58, 59.51, -8.32, -0.39},
    {"LS06",  72.30, 63.59, 72.27, -8.71, -0.03},
    {"KT01",  40.19, 52.44, 51.75, 12.25, 11.55},
}};
// clang-format on

std::vector<TrackLevels> table2_levels() {
    std::vector<TrackLevels> out;
    out.reserve(kTable2.size());
    for (const auto& r : kTable2) out.push_back({std::string(r.track_id), r.nominal, r.ocv, r.hats});
    return out;
}

}  // namespace golden

}  // namespace hpcal
