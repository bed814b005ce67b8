#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <motkit/sequence.hpp>
#include <motkit/tracker.hpp>

namespace motkit {

// One MOT-format line:
// frame,id,bb_left,bb_top,bb_width,bb_height,conf,x,y,z
// Detections use id = -1; x, y, z are -1 placeholders. Rows are grouped by
// ascending frame.
struct MotRow {
    int frame = 1;
    int id = -1;
    double bb_left = 0.0;
    double bb_top = 0.0;
    double bb_width = 0.0;
    double bb_height = 0.0;
    double conf = 1.0;
    double x = -1.0;
    double y = -1.0;
    double z = -1.0;
};

// Shortest round-trip decimal form (to_chars); integral values print with no
// decimal point, so canonical files re-serialize byte-identically.
std::string format_double(double v);

std::string serialize_mot_row(const MotRow& row);

// Throws FormatError with the 1-based line number on any unparsable row.
std::vector<MotRow> parse_mot(std::istream& in);
std::vector<MotRow> read_mot_file(const std::string& path);
void write_mot_file(const std::string& path, const std::vector<MotRow>& rows);

std::vector<MotRow> to_mot_rows(const SequenceResult& seq, double conf = 1.0);
SequenceResult to_sequence(const std::vector<MotRow>& rows);

// Binary embedding sidecar: magic "JDEB", u32 version, u64 count, u32 dim
// (little-endian), then count x dim float32 row-major, one row per detection
// row in file order.
inline constexpr char kEmbeddingMagic[4] = {'J', 'D', 'E', 'B'};
inline constexpr std::uint32_t kEmbeddingVersion = 1;

void write_embeddings(const std::string& path,
                      const std::vector<Eigen::VectorXd>& rows);

// Validates magic, version, dimension consistency and unit row norms
// (within 1e-4); throws FormatError otherwise.
std::vector<Eigen::VectorXd> read_embeddings(const std::string& path);

// Detection rows paired with their embeddings (same order), grouped into
// per-frame lists covering frames 1..max_frame. Pass an empty embeddings
// vector to attach none. Throws FormatError when counts disagree.
std::vector<std::vector<Detection>> group_detections(
    const std::vector<MotRow>& det_rows,
    const std::vector<Eigen::VectorXd>& embeddings);

}  // namespace motkit
