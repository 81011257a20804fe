// io.hpp: CSV readers and writers for spectra, traces and g2 data.
//
// Spectral series layout:
//   # frame_interval_s=<float> t0_s=<float>
//   wavelength_nm,<w1>,<w2>,...
//   <frame_index>,<i1>,<i2>,...
// ZPL trace layout: header `t_s,lambda_nm`, one row per sample.
#pragma once

#include "specdiff/types.hpp"

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace specdiff::io {

// Shortest decimal representation that parses back to the same double.
std::string format_double(double value);
double parse_double(std::string_view text, std::string_view context);

std::vector<std::string_view> split_csv_line(std::string_view line);

SpectralSeries parse_spectral_series(const std::filesystem::path& path);
SpectralSeries read_spectral_series(std::istream& in, std::string_view source = "<stream>");
void write_spectral_series(const SpectralSeries& series, const std::filesystem::path& path);
void write_spectral_series(const SpectralSeries& series, std::ostream& out);

ZplTrace parse_zpl_trace(const std::filesystem::path& path);
ZplTrace read_zpl_trace(std::istream& in, std::string_view source = "<stream>");
void write_zpl_trace(const ZplTrace& trace, const std::filesystem::path& path);
void write_zpl_trace(const ZplTrace& trace, std::ostream& out);

struct G2Data {
    std::vector<double> delays;
    std::vector<double> values;
};

// Header `delay_s,g2`.
G2Data parse_g2(const std::filesystem::path& path);
void write_g2(const G2Data& data, const std::filesystem::path& path);

// Plain numeric table writer used by the analysis outputs.
void write_table(const std::filesystem::path& path, std::span<const std::string> header,
                 const std::vector<std::vector<double>>& columns);

std::string read_text(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, std::string_view text);

}  // namespace specdiff::io
