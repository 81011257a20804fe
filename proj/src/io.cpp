#include "specdiff/io.hpp"

#include "specdiff/error.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace specdiff::io {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

std::ifstream open_in(const std::filesystem::path& path) {
    std::ifstream in(path);
    require(static_cast<bool>(in), ErrorCode::Io, "cannot open " + path.string());
    return in;
}

std::ofstream open_out(const std::filesystem::path& path) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    require(static_cast<bool>(out), ErrorCode::Io, "cannot write " + path.string());
    return out;
}

void finish(std::ofstream& out, const std::filesystem::path& path) {
    out.flush();
    require(static_cast<bool>(out), ErrorCode::Io, "write failed for " + path.string());
}

// Parses `key=value` from the spectral header line.
double header_value(std::string_view line, std::string_view key, std::string_view source) {
    const auto pos = line.find(key);
    require(pos != std::string_view::npos, ErrorCode::MalformedHeader,
            std::string(source) + ": header lacks " + std::string(key));
    auto rest = line.substr(pos + key.size());
    const auto end = rest.find_first_of(" \t");
    rest = rest.substr(0, end);
    double v = 0.0;
    const auto res = std::from_chars(rest.data(), rest.data() + rest.size(), v);
    require(res.ec == std::errc{} && res.ptr == rest.data() + rest.size(), ErrorCode::MalformedHeader,
            std::string(source) + ": cannot parse " + std::string(key));
    return v;
}

}  // namespace

std::string format_double(double value) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), value);
    return std::string(buf, res.ptr);
}

double parse_double(std::string_view text, std::string_view context) {
    text = trim(text);
    require(!text.empty(), ErrorCode::NonFinite, std::string(context) + ": empty field");
    double v = 0.0;
    const char* first = text.data();
    if (*first == '+') ++first;
    const auto res = std::from_chars(first, text.data() + text.size(), v);
    require(res.ec == std::errc{} && res.ptr == text.data() + text.size(), ErrorCode::NonFinite,
            std::string(context) + ": not a number '" + std::string(text) + "'");
    require(std::isfinite(v), ErrorCode::NonFinite, std::string(context) + ": non-finite value");
    return v;
}

std::vector<std::string_view> split_csv_line(std::string_view line) {
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    while (true) {
        const auto comma = line.find(',', start);
        if (comma == std::string_view::npos) {
            fields.push_back(trim(line.substr(start)));
            break;
        }
        fields.push_back(trim(line.substr(start, comma - start)));
        start = comma + 1;
    }
    return fields;
}

// ---------------------------------------------------------------------------

SpectralSeries parse_spectral_series(const std::filesystem::path& path) {
    auto in = open_in(path);
    return read_spectral_series(in, path.string());
}

SpectralSeries read_spectral_series(std::istream& in, std::string_view source) {
    const std::string src(source);
    std::string line;
    require(static_cast<bool>(std::getline(in, line)), ErrorCode::MalformedHeader, src + ": empty file");
    std::string_view header = trim(line);
    require(!header.empty() && header.front() == '#', ErrorCode::MalformedHeader,
            src + ": first line must start with '#'");
    const double frame_interval = header_value(header, "frame_interval_s=", src);
    const double t0 = header_value(header, "t0_s=", src);
    require(std::isfinite(frame_interval) && frame_interval > 0.0, ErrorCode::MalformedHeader,
            src + ": frame_interval_s must be > 0");

    require(static_cast<bool>(std::getline(in, line)), ErrorCode::MalformedHeader,
            src + ": missing wavelength line");
    auto fields = split_csv_line(line);
    require(fields.size() >= 2 && fields[0] == "wavelength_nm", ErrorCode::MalformedHeader,
            src + ": second line must start with 'wavelength_nm'");
    std::vector<double> axis;
    axis.reserve(fields.size() - 1);
    for (std::size_t i = 1; i < fields.size(); ++i) {
        axis.push_back(parse_double(fields[i], src + ": wavelength axis"));
        if (axis.size() >= 2) {
            require(axis.back() > axis[axis.size() - 2], ErrorCode::NonMonotonicAxis,
                    src + ": non-monotonic axis at bin " + std::to_string(i - 1));
        }
    }

    const std::size_t bins = axis.size();
    std::vector<double> data;
    std::size_t rows = 0;
    while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        fields = split_csv_line(line);
        const std::string where = src + ": row " + std::to_string(rows);
        require(fields.size() == bins + 1, ErrorCode::RaggedRow,
                where + " has " + std::to_string(fields.size() - 1) + " bins, expected " +
                    std::to_string(bins));
        const double index = parse_double(fields[0], where + " frame index");
        require(index == static_cast<double>(rows), ErrorCode::MalformedHeader,
                where + ": frame index out of sequence");
        for (std::size_t i = 1; i < fields.size(); ++i) {
            const double v = parse_double(fields[i], where);
            require(v >= 0.0, ErrorCode::NegativeIntensity, where + ": negative intensity");
            data.push_back(v);
        }
        ++rows;
    }
    require(rows > 0, ErrorCode::MalformedHeader, src + ": no frames");
    RowMatrix frames = Eigen::Map<RowMatrix>(data.data(), static_cast<Eigen::Index>(rows),
                                             static_cast<Eigen::Index>(bins));
    return SpectralSeries(std::move(axis), std::move(frames), frame_interval, t0);
}

void write_spectral_series(const SpectralSeries& series, const std::filesystem::path& path) {
    auto out = open_out(path);
    write_spectral_series(series, out);
    finish(out, path);
}

void write_spectral_series(const SpectralSeries& series, std::ostream& out) {
    out << "# frame_interval_s=" << format_double(series.frame_interval())
        << " t0_s=" << format_double(series.t0()) << '\n';
    out << "wavelength_nm";
    for (double w : series.axis()) out << ',' << format_double(w);
    out << '\n';
    std::string row;
    for (std::size_t f = 0; f < series.n_frames(); ++f) {
        row = std::to_string(f);
        for (double v : series.frame(f)) {
            row += ',';
            row += format_double(v);
        }
        row += '\n';
        out << row;
    }
}

// ---------------------------------------------------------------------------

ZplTrace parse_zpl_trace(const std::filesystem::path& path) {
    auto in = open_in(path);
    auto trace = read_zpl_trace(in, path.string());
    return trace;
}

ZplTrace read_zpl_trace(std::istream& in, std::string_view source) {
    const std::string src(source);
    std::string line;
    require(static_cast<bool>(std::getline(in, line)), ErrorCode::MalformedHeader, src + ": empty file");
    const auto header = split_csv_line(line);
    require(header.size() == 2 && header[0] == "t_s" && header[1] == "lambda_nm",
            ErrorCode::MalformedHeader, src + ": header must be 't_s,lambda_nm'");
    std::vector<double> t;
    std::vector<double> v;
    while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        const auto fields = split_csv_line(line);
        const std::string where = src + ": row " + std::to_string(t.size());
        require(fields.size() == 2, ErrorCode::RaggedRow, where + " must have 2 fields");
        t.push_back(parse_double(fields[0], where));
        v.push_back(parse_double(fields[1], where));
    }
    return ZplTrace(std::move(t), std::move(v), std::filesystem::path(src).stem().string());
}

void write_zpl_trace(const ZplTrace& trace, const std::filesystem::path& path) {
    auto out = open_out(path);
    write_zpl_trace(trace, out);
    finish(out, path);
}

void write_zpl_trace(const ZplTrace& trace, std::ostream& out) {
    out << "t_s,lambda_nm\n";
    const auto t = trace.timestamps();
    const auto v = trace.values();
    for (std::size_t i = 0; i < trace.size(); ++i) {
        out << format_double(t[i]) << ',' << format_double(v[i]) << '\n';
    }
}

// ---------------------------------------------------------------------------

G2Data parse_g2(const std::filesystem::path& path) {
    auto in = open_in(path);
    const std::string src = path.string();
    std::string line;
    require(static_cast<bool>(std::getline(in, line)), ErrorCode::MalformedHeader, src + ": empty file");
    const auto header = split_csv_line(line);
    require(header.size() == 2 && header[0] == "delay_s" && header[1] == "g2",
            ErrorCode::MalformedHeader, src + ": header must be 'delay_s,g2'");
    G2Data data;
    while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        const auto fields = split_csv_line(line);
        const std::string where = src + ": row " + std::to_string(data.delays.size());
        require(fields.size() == 2, ErrorCode::RaggedRow, where + " must have 2 fields");
        data.delays.push_back(parse_double(fields[0], where));
        data.values.push_back(parse_double(fields[1], where));
    }
    return data;
}

void write_g2(const G2Data& data, const std::filesystem::path& path) {
    require(data.delays.size() == data.values.size(), ErrorCode::LengthMismatch, "g2 columns differ");
    auto out = open_out(path);
    out << "delay_s,g2\n";
    for (std::size_t i = 0; i < data.delays.size(); ++i) {
        out << format_double(data.delays[i]) << ',' << format_double(data.values[i]) << '\n';
    }
    finish(out, path);
}

void write_table(const std::filesystem::path& path, std::span<const std::string> header,
                 const std::vector<std::vector<double>>& columns) {
    require(header.size() == columns.size(), ErrorCode::LengthMismatch, "table header/columns mismatch");
    const std::size_t rows = columns.empty() ? 0 : columns.front().size();
    for (const auto& c : columns) {
        require(c.size() == rows, ErrorCode::LengthMismatch, "table columns differ in length");
    }
    auto out = open_out(path);
    for (std::size_t i = 0; i < header.size(); ++i) out << (i ? "," : "") << header[i];
    out << '\n';
    for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < columns.size(); ++c) {
            out << (c ? "," : "") << format_double(columns[c][r]);
        }
        out << '\n';
    }
    finish(out, path);
}

std::string read_text(const std::filesystem::path& path) {
    auto in = open_in(path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text(const std::filesystem::path& path, std::string_view text) {
    auto out = open_out(path);
    out << text;
    finish(out, path);
}

}  // namespace specdiff::io
