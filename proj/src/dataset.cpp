#include "cvest/dataset.hpp"

#include "cvest/errors.hpp"
#include "cvest/json_writer.hpp"

#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace cvest {

namespace {

std::string lower_ext(const std::string& path) {
    const auto pos = path.find_last_of('.');
    if (pos == std::string::npos) return "";
    std::string ext = path.substr(pos);
    std::transform(ext.begin(), ext.end(), ext.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return ext;
}

enum class FileFormat { csv, jsonl };

FileFormat detect_format(const std::string& path) {
    const std::string ext = lower_ext(path);
    if (ext == ".csv") return FileFormat::csv;
    if (ext == ".jsonl") return FileFormat::jsonl;
    throw Error(ErrorKind::invalid_argument,
                "unsupported file extension '" + ext + "' for " + path +
                    " (expected .csv or .jsonl)");
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    for (char c : line) {
        if (c == ',') {
            cells.push_back(cell);
            cell.clear();
        } else {
            cell += c;
        }
    }
    cells.push_back(cell);
    return cells;
}

void strip_cr(std::string& line) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
}

double parse_cell(const std::string& cell, const std::string& column, std::size_t line_no) {
    const char* begin = cell.data();
    const char* end = begin + cell.size();
    // tolerate surrounding spaces
    while (begin < end && *begin == ' ') ++begin;
    while (end > begin && *(end - 1) == ' ') --end;
    double value = 0.0;
    const auto result = std::from_chars(begin, end, value);
    if (result.ec != std::errc{} || result.ptr != end || begin == end)
        throw Error(ErrorKind::parse_error, "line " + std::to_string(line_no) +
                                                ": cannot parse '" + cell + "' in column " +
                                                column);
    if (!std::isfinite(value))
        throw Error(ErrorKind::parse_error, "line " + std::to_string(line_no) +
                                                ": non-finite value in column " + column);
    return value;
}

// Column layout resolved from a CSV header: indices of the id / f columns and
// the contiguous G_1..G_d / PHI_1..PHI_m runs.
struct CsvLayout {
    std::size_t n_columns = 0;
    std::size_t id_col = 0;
    std::size_t f_col = 0;
    bool has_f = false;
    std::vector<std::size_t> g_cols;
    std::vector<std::size_t> phi_cols;
};

std::vector<std::size_t> indexed_columns(const std::vector<std::string>& header,
                                         const std::string& prefix) {
    std::vector<std::size_t> cols;
    for (std::size_t index = 1;; ++index) {
        const std::string name = prefix + std::to_string(index);
        const auto it = std::find(header.begin(), header.end(), name);
        if (it == header.end()) {
            // a higher-numbered column with a gap below it is a schema error
            for (std::size_t probe = index + 1; probe <= header.size(); ++probe) {
                const std::string later = prefix + std::to_string(probe);
                if (std::find(header.begin(), header.end(), later) != header.end())
                    throw Error(ErrorKind::schema_error,
                                "column " + later + " present but " + name + " missing");
            }
            return cols;
        }
        cols.push_back(static_cast<std::size_t>(it - header.begin()));
    }
}

CsvLayout resolve_layout(const std::vector<std::string>& header, const ColumnSchema& schema,
                         bool need_f) {
    CsvLayout layout;
    layout.n_columns = header.size();

    const auto id_it = std::find(header.begin(), header.end(), schema.scenario_id);
    if (id_it == header.end())
        throw Error(ErrorKind::schema_error, "missing required column " + schema.scenario_id);
    layout.id_col = static_cast<std::size_t>(id_it - header.begin());

    if (need_f) {
        const auto f_it = std::find(header.begin(), header.end(), schema.f);
        if (f_it == header.end())
            throw Error(ErrorKind::schema_error, "missing required column " + schema.f);
        layout.f_col = static_cast<std::size_t>(f_it - header.begin());
        layout.has_f = true;
    }

    layout.g_cols = indexed_columns(header, schema.g_prefix);
    if (layout.g_cols.empty())
        throw Error(ErrorKind::schema_error, "missing required column " + schema.g_prefix + "1");
    layout.phi_cols = indexed_columns(header, schema.phi_prefix);
    return layout;
}

template <typename RowFn>
void for_each_csv_row(std::istream& in, const std::string& path, const ColumnSchema& schema,
                      bool need_f, CsvLayout& layout, RowFn&& fn) {
    std::string line;
    if (!std::getline(in, line))
        throw Error(ErrorKind::parse_error, path + ": empty file (header required)");
    strip_cr(line);
    layout = resolve_layout(split_csv_line(line), schema, need_f);

    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        strip_cr(line);
        if (line.empty()) continue;
        const auto cells = split_csv_line(line);
        if (cells.size() != layout.n_columns)
            throw Error(ErrorKind::parse_error,
                        "line " + std::to_string(line_no) + ": expected " +
                            std::to_string(layout.n_columns) + " cells, found " +
                            std::to_string(cells.size()));
        fn(cells, line_no);
    }
}

std::ifstream open_input(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::parse_error, "cannot open " + path);
    return in;
}

// ---- JSONL ----------------------------------------------------------------

using nlohmann::json;

json parse_jsonl_line(const std::string& line, std::size_t line_no) {
    json row = json::parse(line, nullptr, false);
    if (row.is_discarded() || !row.is_object())
        throw Error(ErrorKind::parse_error,
                    "line " + std::to_string(line_no) + ": not a JSON object");
    return row;
}

std::string jsonl_scenario_id(const json& row, std::size_t line_no) {
    if (!row.contains("scenario_id"))
        throw Error(ErrorKind::schema_error,
                    "line " + std::to_string(line_no) + ": missing key scenario_id");
    if (!row["scenario_id"].is_string())
        throw Error(ErrorKind::parse_error,
                    "line " + std::to_string(line_no) + ": scenario_id must be a string");
    return row["scenario_id"].get<std::string>();
}

double jsonl_number(const json& v, const char* key, std::size_t line_no) {
    if (!v.is_number())
        throw Error(ErrorKind::parse_error, "line " + std::to_string(line_no) + ": key " + key +
                                                " must be a number");
    const double x = v.get<double>();
    if (!std::isfinite(x))
        throw Error(ErrorKind::parse_error,
                    "line " + std::to_string(line_no) + ": non-finite value in " + key);
    return x;
}

std::vector<double> jsonl_vector(const json& row, const char* key, bool required,
                                 std::size_t line_no) {
    if (!row.contains(key)) {
        if (required)
            throw Error(ErrorKind::schema_error,
                        "line " + std::to_string(line_no) + ": missing key " + key);
        return {};
    }
    const json& arr = row[key];
    if (!arr.is_array())
        throw Error(ErrorKind::parse_error,
                    "line " + std::to_string(line_no) + ": key " + std::string(key) +
                        " must be an array");
    std::vector<double> out;
    out.reserve(arr.size());
    for (const auto& v : arr) out.push_back(jsonl_number(v, key, line_no));
    return out;
}

void check_row_dims(std::size_t got_d, std::size_t got_m, std::size_t d, std::size_t m,
                    std::size_t line_no) {
    if (got_d != d)
        throw Error(ErrorKind::parse_error, "line " + std::to_string(line_no) + ": g has " +
                                                std::to_string(got_d) + " entries, expected " +
                                                std::to_string(d));
    if (got_m != m)
        throw Error(ErrorKind::parse_error, "line " + std::to_string(line_no) + ": phi has " +
                                                std::to_string(got_m) + " entries, expected " +
                                                std::to_string(m));
}

} // namespace

std::vector<double> PairedDataset::f_values() const {
    std::vector<double> out;
    out.reserve(samples.size());
    for (const auto& s : samples) out.push_back(s.f);
    return out;
}

PairedDataset load_paired(const std::string& path, const ColumnSchema& schema) {
    PairedDataset ds;
    const FileFormat format = detect_format(path);
    auto in = open_input(path);

    if (format == FileFormat::csv) {
        CsvLayout layout;
        for_each_csv_row(in, path, schema, /*need_f=*/true, layout,
                         [&](const std::vector<std::string>& cells, std::size_t line_no) {
                             PairedSample s;
                             s.scenario_id = cells[layout.id_col];
                             s.f = parse_cell(cells[layout.f_col], schema.f, line_no);
                             s.g.reserve(layout.g_cols.size());
                             for (std::size_t j = 0; j < layout.g_cols.size(); ++j)
                                 s.g.push_back(parse_cell(cells[layout.g_cols[j]],
                                                          schema.g_prefix + std::to_string(j + 1),
                                                          line_no));
                             for (std::size_t j = 0; j < layout.phi_cols.size(); ++j)
                                 s.phi.push_back(
                                     parse_cell(cells[layout.phi_cols[j]],
                                                schema.phi_prefix + std::to_string(j + 1),
                                                line_no));
                             ds.samples.push_back(std::move(s));
                         });
        ds.d = layout.g_cols.size();
        ds.m = layout.phi_cols.size();
    } else {
        std::string line;
        std::size_t line_no = 0;
        bool dims_set = false;
        while (std::getline(in, line)) {
            ++line_no;
            strip_cr(line);
            if (line.empty()) continue;
            const json row = parse_jsonl_line(line, line_no);
            PairedSample s;
            s.scenario_id = jsonl_scenario_id(row, line_no);
            if (!row.contains("f"))
                throw Error(ErrorKind::schema_error,
                            "line " + std::to_string(line_no) + ": missing key f");
            s.f = jsonl_number(row["f"], "f", line_no);
            s.g = jsonl_vector(row, "g", /*required=*/true, line_no);
            s.phi = jsonl_vector(row, "phi", /*required=*/false, line_no);
            if (s.g.empty())
                throw Error(ErrorKind::parse_error,
                            "line " + std::to_string(line_no) + ": g must be non-empty");
            if (!dims_set) {
                ds.d = s.g.size();
                ds.m = s.phi.size();
                dims_set = true;
            }
            check_row_dims(s.g.size(), s.phi.size(), ds.d, ds.m, line_no);
            ds.samples.push_back(std::move(s));
        }
    }

    if (ds.n() < 2)
        throw Error(ErrorKind::empty_dataset,
                    path + ": paired dataset needs at least 2 rows, found " +
                        std::to_string(ds.n()));
    return ds;
}

SurrogateDataset load_surrogate(const std::string& path, const ColumnSchema& schema) {
    SurrogateDataset ds;
    const FileFormat format = detect_format(path);
    auto in = open_input(path);

    if (format == FileFormat::csv) {
        CsvLayout layout;
        for_each_csv_row(in, path, schema, /*need_f=*/false, layout,
                         [&](const std::vector<std::string>& cells, std::size_t line_no) {
                             SurrogateSample s;
                             s.scenario_id = cells[layout.id_col];
                             for (std::size_t j = 0; j < layout.g_cols.size(); ++j)
                                 s.g.push_back(parse_cell(cells[layout.g_cols[j]],
                                                          schema.g_prefix + std::to_string(j + 1),
                                                          line_no));
                             for (std::size_t j = 0; j < layout.phi_cols.size(); ++j)
                                 s.phi.push_back(
                                     parse_cell(cells[layout.phi_cols[j]],
                                                schema.phi_prefix + std::to_string(j + 1),
                                                line_no));
                             ds.samples.push_back(std::move(s));
                         });
        ds.d = layout.g_cols.size();
        ds.m = layout.phi_cols.size();
    } else {
        std::string line;
        std::size_t line_no = 0;
        bool dims_set = false;
        while (std::getline(in, line)) {
            ++line_no;
            strip_cr(line);
            if (line.empty()) continue;
            const json row = parse_jsonl_line(line, line_no);
            SurrogateSample s;
            s.scenario_id = jsonl_scenario_id(row, line_no);
            s.g = jsonl_vector(row, "g", /*required=*/true, line_no);
            s.phi = jsonl_vector(row, "phi", /*required=*/false, line_no);
            if (s.g.empty())
                throw Error(ErrorKind::parse_error,
                            "line " + std::to_string(line_no) + ": g must be non-empty");
            if (!dims_set) {
                ds.d = s.g.size();
                ds.m = s.phi.size();
                dims_set = true;
            }
            check_row_dims(s.g.size(), s.phi.size(), ds.d, ds.m, line_no);
            ds.samples.push_back(std::move(s));
        }
        // an empty surrogate pool is legal; dimensions stay 0 until first row
    }
    return ds;
}

namespace {

std::ofstream open_output(const std::string& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw Error(ErrorKind::invalid_argument, "cannot write " + path);
    return out;
}

void write_csv_header(std::ofstream& out, const ColumnSchema& schema, bool with_f,
                      std::size_t d, std::size_t m) {
    out << schema.scenario_id;
    if (with_f) out << ',' << schema.f;
    for (std::size_t j = 1; j <= d; ++j) out << ',' << schema.g_prefix << j;
    for (std::size_t j = 1; j <= m; ++j) out << ',' << schema.phi_prefix << j;
    out << '\n';
}

void write_jsonl_sample(std::ofstream& out, const std::string& id, const double* f,
                        const std::vector<double>& g, const std::vector<double>& phi) {
    JsonWriter w;
    w.begin_object();
    w.key_value("scenario_id", id);
    if (f) w.key_value("f", *f);
    w.key("g");
    w.value_array(g);
    if (!phi.empty()) {
        w.key("phi");
        w.value_array(phi);
    }
    w.end_object();
    out << w.str() << '\n';
}

} // namespace

void save_paired(const PairedDataset& ds, const std::string& path, const ColumnSchema& schema) {
    const FileFormat format = detect_format(path);
    auto out = open_output(path);
    if (format == FileFormat::csv) {
        write_csv_header(out, schema, /*with_f=*/true, ds.d, ds.m);
        for (const auto& s : ds.samples) {
            out << s.scenario_id << ',' << format_double(s.f);
            for (double v : s.g) out << ',' << format_double(v);
            for (double v : s.phi) out << ',' << format_double(v);
            out << '\n';
        }
    } else {
        for (const auto& s : ds.samples) write_jsonl_sample(out, s.scenario_id, &s.f, s.g, s.phi);
    }
}

void save_surrogate(const SurrogateDataset& ds, const std::string& path,
                    const ColumnSchema& schema) {
    const FileFormat format = detect_format(path);
    auto out = open_output(path);
    if (format == FileFormat::csv) {
        write_csv_header(out, schema, /*with_f=*/false, ds.d, ds.m);
        for (const auto& s : ds.samples) {
            out << s.scenario_id;
            for (double v : s.g) out << ',' << format_double(v);
            for (double v : s.phi) out << ',' << format_double(v);
            out << '\n';
        }
    } else {
        for (const auto& s : ds.samples)
            write_jsonl_sample(out, s.scenario_id, nullptr, s.g, s.phi);
    }
}

void check_compatibility(const PairedDataset& paired, const SurrogateDataset& surrogate,
                         bool features_required) {
    if (surrogate.k() == 0) return; // empty pool is compatible with anything
    if (paired.d != surrogate.d)
        throw Error(ErrorKind::dimension_mismatch,
                    "paired d=" + std::to_string(paired.d) + " vs surrogate d=" +
                        std::to_string(surrogate.d));
    if (features_required && paired.m != surrogate.m)
        throw Error(ErrorKind::dimension_mismatch,
                    "feature dimensions differ (paired m=" + std::to_string(paired.m) +
                        ", surrogate m=" + std::to_string(surrogate.m) +
                        ") and features are in use");
}

void check_binary_metric(const PairedDataset& ds) {
    for (std::size_t i = 0; i < ds.samples.size(); ++i) {
        const double f = ds.samples[i].f;
        if (f != 0.0 && f != 1.0)
            throw Error(ErrorKind::invalid_argument,
                        "binary metric requires f in {0,1}; sample " + std::to_string(i) +
                            " has f=" + format_double(f));
    }
}

void validate_paired(const PairedDataset& ds) {
    for (std::size_t i = 0; i < ds.samples.size(); ++i) {
        const auto& s = ds.samples[i];
        if (s.g.size() != ds.d || s.phi.size() != ds.m)
            throw Error(ErrorKind::dimension_mismatch,
                        "sample " + std::to_string(i) + " has inconsistent dimensions");
        if (!std::isfinite(s.f))
            throw Error(ErrorKind::invalid_argument,
                        "sample " + std::to_string(i) + " has non-finite f");
        for (double v : s.g)
            if (!std::isfinite(v))
                throw Error(ErrorKind::invalid_argument,
                            "sample " + std::to_string(i) + " has non-finite g");
        for (double v : s.phi)
            if (!std::isfinite(v))
                throw Error(ErrorKind::invalid_argument,
                            "sample " + std::to_string(i) + " has non-finite phi");
    }
}

void validate_surrogate(const SurrogateDataset& ds) {
    for (std::size_t i = 0; i < ds.samples.size(); ++i) {
        const auto& s = ds.samples[i];
        if (s.g.size() != ds.d || s.phi.size() != ds.m)
            throw Error(ErrorKind::dimension_mismatch,
                        "surrogate sample " + std::to_string(i) + " has inconsistent dimensions");
        for (double v : s.g)
            if (!std::isfinite(v))
                throw Error(ErrorKind::invalid_argument,
                            "surrogate sample " + std::to_string(i) + " has non-finite g");
        for (double v : s.phi)
            if (!std::isfinite(v))
                throw Error(ErrorKind::invalid_argument,
                            "surrogate sample " + std::to_string(i) + " has non-finite phi");
    }
}

} // namespace cvest
