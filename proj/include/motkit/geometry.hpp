#pragma once

#include <cstddef>
#include <vector>

namespace motkit {

// Axis-aligned box, (left, top, width, height) in pixels. Width and height
// must be strictly positive.
struct Box {
    double x = 0.0;
    double y = 0.0;
    double w = 1.0;
    double h = 1.0;

    double cx() const { return x + 0.5 * w; }
    double cy() const { return y + 0.5 * h; }
    double right() const { return x + w; }
    double bottom() const { return y + h; }
    double area() const { return w * h; }

    static Box from_center(double cx, double cy, double w, double h) {
        return Box{cx - 0.5 * w, cy - 0.5 * h, w, h};
    }

    bool valid() const { return w > 0.0 && h > 0.0; }

    friend bool operator==(const Box&, const Box&) = default;
};

// Prior box shape tiled over a feature-map level. Aspect ratio is fixed at
// 1:3 (h = 3w); widths follow 8*2^(k/2), k = 1..12, four templates per level
// with the smallest widths on the finest (1/8) level, scale_index 0.
struct AnchorTemplate {
    double width = 0.0;
    double height = 0.0;
    int scale_index = 0;     // 0 = 1/8 level, 1 = 1/16, 2 = 1/32
    int template_index = 0;  // 0..11, ascending width
};

enum class AnchorClass { Foreground, Background, Ignore };

struct AnchorLabel {
    AnchorClass cls = AnchorClass::Background;
    int gt_index = -1;  // argmax ground truth when Foreground, else -1
};

// Center-offset / log-scale regression encoding (RPN convention).
struct RegressionTarget {
    double tx = 0.0;
    double ty = 0.0;
    double tw = 0.0;
    double th = 0.0;
};

// Intersection over union of two boxes in [0, 1]. Throws std::invalid_argument
// if either box has a non-positive dimension.
double iou(const Box& a, const Box& b);

// The 12 anchor templates, ascending width, partitioned 4/4/4 over the three
// pyramid levels.
std::vector<AnchorTemplate> make_anchor_templates();

// Dual-threshold label assignment: best IOU > 0.5 foreground, < 0.4
// background, otherwise ignore. Foreground records the argmax ground-truth
// index, lowest index on exact ties. Empty gts makes everything background.
std::vector<AnchorLabel> assign_anchors(const std::vector<Box>& anchors,
                                        const std::vector<Box>& gts);

RegressionTarget encode_box(const Box& gt, const Box& anchor);
Box decode_box(const RegressionTarget& t, const Box& anchor);

}  // namespace motkit
