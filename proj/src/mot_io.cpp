#include <motkit/mot_io.hpp>

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

namespace motkit {

namespace {

double parse_number(const std::string& field, int line_no) {
    double v = 0.0;
    const char* first = field.data();
    const char* last = field.data() + field.size();
    while (first != last && (*first == ' ' || *first == '\t')) ++first;
    const auto res = std::from_chars(first, last, v);
    if (res.ec != std::errc() || res.ptr != last) {
        throw FormatError("line " + std::to_string(line_no) + ": bad number '" + field + "'");
    }
    return v;
}

int parse_int(const std::string& field, int line_no) {
    const double v = parse_number(field, line_no);
    const int i = static_cast<int>(v);
    if (static_cast<double>(i) != v) {
        throw FormatError("line " + std::to_string(line_no) + ": expected integer, got '" +
                          field + "'");
    }
    return i;
}

template <typename T>
void write_le(std::ostream& out, T v) {
    std::array<unsigned char, sizeof(T)> bytes;
    for (std::size_t i = 0; i < sizeof(T); ++i) {
        bytes[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xff);
    }
    out.write(reinterpret_cast<const char*>(bytes.data()), sizeof(T));
}

template <typename T>
T read_le(std::istream& in, const char* what) {
    std::array<unsigned char, sizeof(T)> bytes;
    in.read(reinterpret_cast<char*>(bytes.data()), sizeof(T));
    if (!in) throw FormatError(std::string("embedding file: truncated ") + what);
    T v = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) {
        v |= static_cast<T>(bytes[i]) << (8 * i);
    }
    return v;
}

}  // namespace

std::string format_double(double v) {
    std::array<char, 64> buf;
    const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    return std::string(buf.data(), res.ptr);
}

std::string serialize_mot_row(const MotRow& row) {
    std::string out = std::to_string(row.frame);
    out += ',';
    out += std::to_string(row.id);
    for (const double v : {row.bb_left, row.bb_top, row.bb_width, row.bb_height,
                           row.conf, row.x, row.y, row.z}) {
        out += ',';
        out += format_double(v);
    }
    return out;
}

std::vector<MotRow> parse_mot(std::istream& in) {
    std::vector<MotRow> rows;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;

        std::vector<std::string> fields;
        std::stringstream ss(line);
        std::string field;
        while (std::getline(ss, field, ',')) fields.push_back(field);
        if (fields.size() != 10) {
            throw FormatError("line " + std::to_string(line_no) + ": expected 10 fields, got " +
                              std::to_string(fields.size()));
        }
        MotRow row;
        row.frame = parse_int(fields[0], line_no);
        row.id = parse_int(fields[1], line_no);
        row.bb_left = parse_number(fields[2], line_no);
        row.bb_top = parse_number(fields[3], line_no);
        row.bb_width = parse_number(fields[4], line_no);
        row.bb_height = parse_number(fields[5], line_no);
        row.conf = parse_number(fields[6], line_no);
        row.x = parse_number(fields[7], line_no);
        row.y = parse_number(fields[8], line_no);
        row.z = parse_number(fields[9], line_no);
        if (row.frame < 1) {
            throw FormatError("line " + std::to_string(line_no) + ": frame must be >= 1");
        }
        if (row.bb_width <= 0.0 || row.bb_height <= 0.0) {
            throw FormatError("line " + std::to_string(line_no) +
                              ": box width/height must be positive");
        }
        rows.push_back(row);
    }
    return rows;
}

std::vector<MotRow> read_mot_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw FormatError("cannot open '" + path + "'");
    return parse_mot(in);
}

void write_mot_file(const std::string& path, const std::vector<MotRow>& rows) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write '" + path + "'");
    for (const auto& row : rows) {
        out << serialize_mot_row(row) << '\n';
    }
    if (!out) throw std::runtime_error("write failed for '" + path + "'");
}

std::vector<MotRow> to_mot_rows(const SequenceResult& seq, double conf) {
    std::vector<MotRow> rows;
    rows.reserve(seq.rows.size());
    for (const auto& r : seq.rows) {
        MotRow row;
        row.frame = r.frame;
        row.id = r.id;
        row.bb_left = r.box.x;
        row.bb_top = r.box.y;
        row.bb_width = r.box.w;
        row.bb_height = r.box.h;
        row.conf = conf;
        rows.push_back(row);
    }
    std::stable_sort(rows.begin(), rows.end(),
                     [](const MotRow& a, const MotRow& b) { return a.frame < b.frame; });
    return rows;
}

SequenceResult to_sequence(const std::vector<MotRow>& rows) {
    SequenceResult seq;
    seq.rows.reserve(rows.size());
    for (const auto& r : rows) {
        seq.rows.push_back(
            {r.frame, r.id, Box{r.bb_left, r.bb_top, r.bb_width, r.bb_height}});
    }
    seq.validate();
    return seq;
}

void write_embeddings(const std::string& path,
                      const std::vector<Eigen::VectorXd>& rows) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write '" + path + "'");
    const std::uint32_t dim =
        rows.empty() ? 0 : static_cast<std::uint32_t>(rows.front().size());
    out.write(kEmbeddingMagic, 4);
    write_le<std::uint32_t>(out, kEmbeddingVersion);
    write_le<std::uint64_t>(out, static_cast<std::uint64_t>(rows.size()));
    write_le<std::uint32_t>(out, dim);
    for (const auto& row : rows) {
        if (static_cast<std::uint32_t>(row.size()) != dim) {
            throw std::invalid_argument("write_embeddings: inconsistent dimensions");
        }
        for (Eigen::Index i = 0; i < row.size(); ++i) {
            const float f = static_cast<float>(row[i]);
            std::uint32_t bits;
            std::memcpy(&bits, &f, sizeof(bits));
            write_le<std::uint32_t>(out, bits);
        }
    }
    if (!out) throw std::runtime_error("write failed for '" + path + "'");
}

std::vector<Eigen::VectorXd> read_embeddings(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("cannot open '" + path + "'");

    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, kEmbeddingMagic, 4) != 0) {
        throw FormatError("embedding file: bad magic (expected JDEB)");
    }
    const auto version = read_le<std::uint32_t>(in, "version");
    if (version != kEmbeddingVersion) {
        throw FormatError("embedding file: unsupported version " + std::to_string(version));
    }
    const auto count = read_le<std::uint64_t>(in, "count");
    const auto dim = read_le<std::uint32_t>(in, "dim");
    if (count > 0 && dim == 0) {
        throw FormatError("embedding file: zero dimension with nonzero count");
    }

    std::vector<Eigen::VectorXd> rows;
    rows.reserve(count);
    for (std::uint64_t r = 0; r < count; ++r) {
        Eigen::VectorXd v(static_cast<Eigen::Index>(dim));
        for (std::uint32_t i = 0; i < dim; ++i) {
            const auto bits = read_le<std::uint32_t>(in, "payload");
            float f;
            std::memcpy(&f, &bits, sizeof(f));
            v[static_cast<Eigen::Index>(i)] = static_cast<double>(f);
        }
        const double norm = v.norm();
        if (std::abs(norm - 1.0) > 1e-4) {
            throw FormatError("embedding file: row " + std::to_string(r) +
                              " norm " + format_double(norm) + " is not unit within 1e-4");
        }
        rows.push_back(std::move(v));
    }
    return rows;
}

std::vector<std::vector<Detection>> group_detections(
    const std::vector<MotRow>& det_rows,
    const std::vector<Eigen::VectorXd>& embeddings) {
    if (!embeddings.empty() && embeddings.size() != det_rows.size()) {
        throw FormatError("detection/embedding count mismatch: " +
                          std::to_string(det_rows.size()) + " rows vs " +
                          std::to_string(embeddings.size()) + " embeddings");
    }
    int max_frame = 0;
    for (const auto& r : det_rows) max_frame = std::max(max_frame, r.frame);

    std::vector<std::vector<Detection>> frames(static_cast<std::size_t>(max_frame));
    for (std::size_t i = 0; i < det_rows.size(); ++i) {
        const auto& r = det_rows[i];
        Detection d;
        d.box = Box{r.bb_left, r.bb_top, r.bb_width, r.bb_height};
        d.confidence = r.conf;
        if (!embeddings.empty()) d.embedding = embeddings[i];
        frames[static_cast<std::size_t>(r.frame - 1)].push_back(std::move(d));
    }
    return frames;
}

}  // namespace motkit
