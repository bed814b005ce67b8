#include <motkit/losses.hpp>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace motkit {

namespace {

void require_batch(const EmbeddingBatch& batch, const char* what) {
    if (batch.positives.empty()) {
        throw std::invalid_argument(std::string(what) + ": batch needs at least one positive");
    }
    if (batch.negatives.empty()) {
        throw std::invalid_argument(std::string(what) + ": batch needs at least one negative");
    }
    const Eigen::Index dim = batch.anchor.size();
    for (const auto& p : batch.positives) {
        if (p.size() != dim) throw std::invalid_argument(std::string(what) + ": dimension mismatch");
    }
    for (const auto& n : batch.negatives) {
        if (n.size() != dim) throw std::invalid_argument(std::string(what) + ": dimension mismatch");
    }
}

// Index of the positive with the lowest dot product against the anchor;
// lowest index wins exact ties.
std::size_t hardest_positive(const EmbeddingBatch& batch) {
    std::size_t best = 0;
    double best_dot = batch.anchor.dot(batch.positives[0]);
    for (std::size_t i = 1; i < batch.positives.size(); ++i) {
        const double d = batch.anchor.dot(batch.positives[i]);
        if (d < best_dot) {
            best_dot = d;
            best = i;
        }
    }
    return best;
}

EmbeddingGrad zero_grad(const EmbeddingBatch& batch) {
    EmbeddingGrad g;
    g.d_anchor = Eigen::VectorXd::Zero(batch.anchor.size());
    g.d_positives.assign(batch.positives.size(),
                         Eigen::VectorXd::Zero(batch.anchor.size()));
    g.d_negatives.assign(batch.negatives.size(),
                         Eigen::VectorXd::Zero(batch.anchor.size()));
    return g;
}

}  // namespace

EmbeddingBatch make_embedding_batch(const std::vector<Eigen::VectorXd>& embeddings,
                                    const std::vector<int>& labels,
                                    std::size_t anchor_index) {
    if (embeddings.size() != labels.size()) {
        throw std::invalid_argument("make_embedding_batch: embeddings/labels size mismatch");
    }
    if (anchor_index >= embeddings.size()) {
        throw std::invalid_argument("make_embedding_batch: anchor index out of range");
    }
    const int anchor_label = labels[anchor_index];
    if (anchor_label < 0) {
        throw std::invalid_argument("make_embedding_batch: anchor must carry an identity label");
    }
    EmbeddingBatch batch;
    batch.anchor = embeddings[anchor_index];
    for (std::size_t i = 0; i < embeddings.size(); ++i) {
        if (i == anchor_index || labels[i] < 0) continue;
        if (labels[i] == anchor_label) {
            batch.positives.push_back(embeddings[i]);
        } else {
            batch.negatives.push_back(embeddings[i]);
        }
    }
    return batch;
}

LossValueGrad triplet_loss(const EmbeddingBatch& batch) {
    require_batch(batch, "triplet_loss");
    const std::size_t hp = hardest_positive(batch);
    const double pos_dot = batch.anchor.dot(batch.positives[hp]);

    LossValueGrad out;
    out.grad = zero_grad(batch);
    for (std::size_t i = 0; i < batch.negatives.size(); ++i) {
        const double margin = batch.anchor.dot(batch.negatives[i]) - pos_dot;
        if (margin > 0.0) {
            out.value += margin;
            out.grad.d_anchor += batch.negatives[i] - batch.positives[hp];
            out.grad.d_negatives[i] += batch.anchor;
            out.grad.d_positives[hp] -= batch.anchor;
        }
    }
    return out;
}

LossValueGrad upper_bound_loss(const EmbeddingBatch& batch) {
    require_batch(batch, "upper_bound_loss");
    const std::size_t hp = hardest_positive(batch);
    const double pos_dot = batch.anchor.dot(batch.positives[hp]);

    const std::size_t n = batch.negatives.size();
    Eigen::VectorXd margins(static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) {
        margins[static_cast<Eigen::Index>(i)] =
            batch.anchor.dot(batch.negatives[i]) - pos_dot;
    }

    // log(1 + sum exp(m_i)) = shift + log(exp(-shift) + sum exp(m_i - shift))
    const double shift = std::max(0.0, margins.maxCoeff());
    const double tail = std::exp(-shift) + (margins.array() - shift).exp().sum();

    LossValueGrad out;
    out.value = shift + std::log(tail);
    out.grad = zero_grad(batch);

    double sigma_sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double sigma =
            std::exp(margins[static_cast<Eigen::Index>(i)] - shift) / tail;
        sigma_sum += sigma;
        out.grad.d_negatives[i] = sigma * batch.anchor;
        out.grad.d_anchor += sigma * (batch.negatives[i] - batch.positives[hp]);
    }
    out.grad.d_positives[hp] = -sigma_sum * batch.anchor;
    return out;
}

double softmax_form_loss(const EmbeddingBatch& batch) {
    require_batch(batch, "softmax_form_loss");
    const std::size_t hp = hardest_positive(batch);
    const double pos_dot = batch.anchor.dot(batch.positives[hp]);

    // -log softmax over the logits {f.p*, f.n_1, ..., f.n_k}.
    Eigen::VectorXd logits(static_cast<Eigen::Index>(batch.negatives.size()) + 1);
    logits[0] = pos_dot;
    for (std::size_t i = 0; i < batch.negatives.size(); ++i) {
        logits[static_cast<Eigen::Index>(i) + 1] = batch.anchor.dot(batch.negatives[i]);
    }
    const double shift = logits.maxCoeff();
    const double lse = shift + std::log((logits.array() - shift).exp().sum());
    return lse - pos_dot;
}

CrossEntropyResult cross_entropy_loss(const Eigen::VectorXd& logits, int target) {
    if (logits.size() < 2) {
        throw std::invalid_argument("cross_entropy_loss: need at least two classes");
    }
    if (target < 0 || target >= logits.size()) {
        throw std::invalid_argument("cross_entropy_loss: target out of range");
    }
    const double shift = logits.maxCoeff();
    const Eigen::ArrayXd shifted = logits.array() - shift;
    const double denom = shifted.exp().sum();

    CrossEntropyResult out;
    out.value = std::log(denom) - shifted[target];
    out.d_logits = (shifted.exp() / denom).matrix();
    out.d_logits[target] -= 1.0;
    return out;
}

double weighted_total_loss(const TaskLossSet& set, const Eigen::MatrixXd& weights) {
    if (set.losses.rows() < 1 || set.losses.cols() != 3) {
        throw std::invalid_argument("weighted_total_loss: losses must be M x 3 with M >= 1");
    }
    if (weights.rows() != set.losses.rows() || weights.cols() != set.losses.cols()) {
        throw std::invalid_argument("weighted_total_loss: weight shape mismatch");
    }
    if (!weights.allFinite() || (weights.array() < 0.0).any()) {
        throw std::invalid_argument("weighted_total_loss: weights must be finite and >= 0");
    }
    return (weights.array() * set.losses.array()).sum();
}

Eigen::MatrixXd make_app_opt_weights(double w_det, double w_emb, int heads) {
    Eigen::MatrixXd w(heads, 3);
    w.col(kTaskClassification).setConstant(w_det);
    w.col(kTaskBoxRegression).setConstant(w_det);
    w.col(kTaskEmbedding).setConstant(w_emb);
    return w;
}

bool validate_app_opt_weights(const Eigen::MatrixXd& weights, double tol) {
    if (weights.rows() < 1 || weights.cols() != 3) return false;
    for (Eigen::Index i = 0; i < weights.rows(); ++i) {
        if (std::abs(weights(i, kTaskClassification) - weights(i, kTaskBoxRegression)) > tol) {
            return false;
        }
        for (Eigen::Index j = 0; j < 3; ++j) {
            if (std::abs(weights(i, j) - weights(0, j)) > tol) return false;
        }
    }
    return true;
}

UncertaintyResult uncertainty_total_loss(const TaskLossSet& set,
                                         const Eigen::MatrixXd& s) {
    if (s.rows() != set.losses.rows() || s.cols() != set.losses.cols()) {
        throw std::invalid_argument("uncertainty_total_loss: s shape mismatch");
    }
    if (!s.allFinite()) {
        throw std::invalid_argument("uncertainty_total_loss: s must be finite");
    }
    UncertaintyResult out;
    const Eigen::ArrayXXd expneg = (-s.array()).exp();
    out.value = (0.5 * (expneg * set.losses.array() + s.array())).sum();
    out.d_s = (0.5 * (1.0 - expneg * set.losses.array())).matrix();
    return out;
}

Eigen::VectorXd loss_norm_weights(const Eigen::VectorXd& moving_averages) {
    if ((moving_averages.array() <= 0.0).any()) {
        throw std::invalid_argument("loss_norm_weights: averages must be positive");
    }
    return moving_averages.cwiseInverse();
}

LossNormAverager::LossNormAverager(int tasks, double momentum)
    : momentum_(momentum), avg_(Eigen::VectorXd::Zero(tasks)) {
    if (tasks < 1) throw std::invalid_argument("LossNormAverager: need at least one task");
    if (!(momentum >= 0.0 && momentum < 1.0)) {
        throw std::invalid_argument("LossNormAverager: momentum must be in [0, 1)");
    }
}

void LossNormAverager::observe(const Eigen::VectorXd& losses) {
    if (losses.size() != avg_.size()) {
        throw std::invalid_argument("LossNormAverager: task count mismatch");
    }
    if (!seeded_) {
        avg_ = losses;
        seeded_ = true;
    } else {
        avg_ = momentum_ * avg_ + (1.0 - momentum_) * losses;
    }
}

}  // namespace motkit
