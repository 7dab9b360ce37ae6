#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <span>
#include <string>
#include <vector>

#include "starkmbl/fields.hpp"
#include "starkmbl/observables.hpp"
#include "starkmbl/spectrum.hpp"
#include "starkmbl/sweff.hpp"

namespace starkmbl {

/// Pinned numeric format for all CSV output: 17 significant digits, '.'
/// decimal point, '\n' line endings.
inline std::string format_g17(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

class CsvWriter {
  public:
    CsvWriter(const std::filesystem::path& path, std::span<const std::string> metadata_lines,
              std::span<const std::string> columns)
        : out_(path, std::ios::binary) {
        if (!out_) throw config_error("cannot open output file " + path.string());
        for (const std::string& line : metadata_lines) out_ << "# " << line << "\n";
        for (std::size_t i = 0; i < columns.size(); ++i)
            out_ << (i ? "," : "") << columns[i];
        out_ << "\n";
    }

    void row(std::span<const double> values) {
        for (std::size_t i = 0; i < values.size(); ++i)
            out_ << (i ? "," : "") << format_g17(values[i]);
        out_ << "\n";
    }

  private:
    std::ofstream out_;
};

inline void write_scalar_series_csv(const std::filesystem::path& path, const TimeSeries& ts,
                                    std::span<const std::string> metadata,
                                    const std::string& value_name = "value",
                                    const TimeSeries* std_error = nullptr) {
    std::vector<std::string> cols{"t_j0", value_name};
    if (std_error) cols.push_back("stderr");
    CsvWriter w(path, metadata, cols);
    for (std::size_t i = 0; i < ts.t.size(); ++i) {
        std::vector<double> row{ts.t[i], ts.v[i]};
        if (std_error) row.push_back(std_error->v[i]);
        w.row(row);
    }
}

inline void write_site_series_csv(const std::filesystem::path& path, const SiteSeries& ss,
                                  std::span<const std::string> metadata) {
    if (ss.sz.empty()) throw config_error("empty site series");
    std::vector<std::string> cols{"t_j0"};
    for (std::size_t j = 1; j <= ss.sz.front().size(); ++j)
        cols.push_back("sz_" + std::to_string(j));
    CsvWriter w(path, metadata, cols);
    for (std::size_t i = 0; i < ss.t.size(); ++i) {
        std::vector<double> row{ss.t[i]};
        row.insert(row.end(), ss.sz[i].begin(), ss.sz[i].end());
        w.row(row);
    }
}

inline void write_histogram_csv(const std::filesystem::path& path, const Histogram& h,
                                std::span<const std::string> metadata) {
    CsvWriter w(path, metadata, std::vector<std::string>{"bin_lo", "bin_hi", "density"});
    for (std::size_t i = 0; i < h.density.size(); ++i)
        w.row(std::vector<double>{h.edges[i], h.edges[i + 1], h.density[i]});
}

inline void write_field_csv(const std::filesystem::path& path, const FieldProfile& f,
                            std::span<const std::string> metadata) {
    CsvWriter w(path, metadata, std::vector<std::string>{"site", "bz_over_j0"});
    for (int j = 1; j <= f.n(); ++j)
        w.row(std::vector<double>{static_cast<double>(j), f.at(j)});
}

inline void write_dipole_terms_csv(const std::filesystem::path& path,
                                   std::span<const DipoleTerm> terms,
                                   std::span<const std::string> metadata) {
    CsvWriter w(path, metadata,
                std::vector<std::string>{"i", "j", "k", "l", "amplitude_j0cubed_over_g2"});
    for (const DipoleTerm& t : terms)
        w.row(std::vector<double>{static_cast<double>(t.i), static_cast<double>(t.j),
                                  static_cast<double>(t.k), static_cast<double>(t.l), t.amplitude});
}

} // namespace starkmbl
