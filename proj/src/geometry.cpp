#include <motkit/geometry.hpp>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace motkit {

namespace {

void require_valid(const Box& b, const char* what) {
    if (!b.valid()) {
        throw std::invalid_argument(std::string(what) +
                                    ": box width/height must be positive");
    }
}

}  // namespace

double iou(const Box& a, const Box& b) {
    require_valid(a, "iou");
    require_valid(b, "iou");
    const double ix = std::max(0.0, std::min(a.right(), b.right()) - std::max(a.x, b.x));
    const double iy = std::max(0.0, std::min(a.bottom(), b.bottom()) - std::max(a.y, b.y));
    const double inter = ix * iy;
    if (inter <= 0.0) return 0.0;
    return inter / (a.area() + b.area() - inter);
}

std::vector<AnchorTemplate> make_anchor_templates() {
    std::vector<AnchorTemplate> out;
    out.reserve(12);
    for (int k = 1; k <= 12; ++k) {
        const double width = 8.0 * std::pow(2.0, k / 2.0);
        AnchorTemplate t;
        t.width = width;
        t.height = 3.0 * width;
        t.scale_index = (k - 1) / 4;
        t.template_index = k - 1;
        out.push_back(t);
    }
    return out;
}

std::vector<AnchorLabel> assign_anchors(const std::vector<Box>& anchors,
                                        const std::vector<Box>& gts) {
    std::vector<AnchorLabel> labels(anchors.size());
    for (std::size_t i = 0; i < anchors.size(); ++i) {
        double best = 0.0;
        int best_gt = -1;
        for (std::size_t j = 0; j < gts.size(); ++j) {
            const double v = iou(anchors[i], gts[j]);
            if (v > best) {  // strict: ties keep the lowest gt index
                best = v;
                best_gt = static_cast<int>(j);
            }
        }
        if (best > 0.5) {
            labels[i] = {AnchorClass::Foreground, best_gt};
        } else if (best < 0.4) {
            labels[i] = {AnchorClass::Background, -1};
        } else {
            labels[i] = {AnchorClass::Ignore, -1};
        }
    }
    return labels;
}

RegressionTarget encode_box(const Box& gt, const Box& anchor) {
    require_valid(gt, "encode_box");
    require_valid(anchor, "encode_box");
    RegressionTarget t;
    t.tx = (gt.cx() - anchor.cx()) / anchor.w;
    t.ty = (gt.cy() - anchor.cy()) / anchor.h;
    t.tw = std::log(gt.w / anchor.w);
    t.th = std::log(gt.h / anchor.h);
    return t;
}

Box decode_box(const RegressionTarget& t, const Box& anchor) {
    require_valid(anchor, "decode_box");
    const double cx = anchor.cx() + t.tx * anchor.w;
    const double cy = anchor.cy() + t.ty * anchor.h;
    const double w = anchor.w * std::exp(t.tw);
    const double h = anchor.h * std::exp(t.th);
    return Box::from_center(cx, cy, w, h);
}

}  // namespace motkit
