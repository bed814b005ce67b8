#pragma once

#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include <motkit/geometry.hpp>

namespace motkit {

// Malformed input data: bad file rows, duplicate (frame, id) pairs, header
// mismatches. CLI maps this to exit code 2.
class FormatError : public std::runtime_error {
public:
    explicit FormatError(const std::string& msg) : std::runtime_error(msg) {}
};

struct TrackRow {
    int frame = 1;  // 1-based
    int id = 0;
    Box box;
};

// Per-sequence collection of (frame, id, box) rows, hypothesis or ground
// truth. (frame, id) pairs are unique.
struct SequenceResult {
    std::vector<TrackRow> rows;

    // Throws FormatError on a duplicate (frame, id) pair or negative frame.
    void validate() const;

    // Rows grouped by frame, ascending.
    std::map<int, std::vector<const TrackRow*>> by_frame() const;

    bool empty() const { return rows.empty(); }
};

}  // namespace motkit
