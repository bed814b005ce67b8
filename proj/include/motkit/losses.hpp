#pragma once

#include <Eigen/Dense>
#include <vector>

namespace motkit {

// One metric-learning batch: an anchor embedding, its positive instances and
// its negative instances. Instances carrying identity label -1 never enter a
// batch; make_embedding_batch enforces that.
struct EmbeddingBatch {
    Eigen::VectorXd anchor;
    std::vector<Eigen::VectorXd> positives;
    std::vector<Eigen::VectorXd> negatives;
};

// Builds a batch around embeddings[anchor_index]. Positives share the
// anchor's label, negatives carry a different non-negative label; label -1
// instances are excluded on both sides. The anchor itself must be labeled.
EmbeddingBatch make_embedding_batch(const std::vector<Eigen::VectorXd>& embeddings,
                                    const std::vector<int>& labels,
                                    std::size_t anchor_index);

struct EmbeddingGrad {
    Eigen::VectorXd d_anchor;
    std::vector<Eigen::VectorXd> d_positives;
    std::vector<Eigen::VectorXd> d_negatives;
};

struct LossValueGrad {
    double value = 0.0;
    EmbeddingGrad grad;
};

// Hinge loss over every negative against the hardest (lowest-dot) positive:
// sum_i max(0, f.n_i - f.p*). No margin term.
LossValueGrad triplet_loss(const EmbeddingBatch& batch);

// Smooth variant log(1 + sum_i exp(f.n_i - f.p*)), computed with a shifted
// log-sum-exp so large dot products cannot overflow.
LossValueGrad upper_bound_loss(const EmbeddingBatch& batch);

// Softmax rewrite -log(exp(f.p*) / (exp(f.p*) + sum_i exp(f.n_i))); equals
// upper_bound_loss algebraically but is evaluated along its own route.
double softmax_form_loss(const EmbeddingBatch& batch);

struct CrossEntropyResult {
    double value = 0.0;
    Eigen::VectorXd d_logits;  // softmax - one_hot(target)
};

// Softmax negative log-likelihood over class logits.
CrossEntropyResult cross_entropy_loss(const Eigen::VectorXd& logits, int target);

// Per-head, per-task losses for the three-task objective. Rows are
// prediction heads, columns are {classification, box regression, embedding}.
struct TaskLossSet {
    Eigen::MatrixXd losses;  // M x 3
};

inline constexpr int kTaskClassification = 0;
inline constexpr int kTaskBoxRegression = 1;
inline constexpr int kTaskEmbedding = 2;

// Weighted linear sum sum_ij w(i,j) * L(i,j). Weights all one reproduces the
// uniform baseline.
double weighted_total_loss(const TaskLossSet& set, const Eigen::MatrixXd& weights);

// Grid-search weights under the reduced two-variable scheme: classification
// and box regression share w_det on every head, embedding takes w_emb on
// every head.
Eigen::MatrixXd make_app_opt_weights(double w_det, double w_emb, int heads);

// True when weights satisfy the reduced scheme (w_cls == w_box per head,
// each task constant across heads).
bool validate_app_opt_weights(const Eigen::MatrixXd& weights, double tol = 1e-12);

struct UncertaintyResult {
    double value = 0.0;
    Eigen::MatrixXd d_s;  // d/ds = 0.5 * (1 - exp(-s) * L), per term
};

// Uncertainty-weighted objective sum_ij 0.5 * (exp(-s_ij) * L_ij + s_ij).
// Each term is minimized over s at s = log L with value 0.5 * (1 + log L).
UncertaintyResult uncertainty_total_loss(const TaskLossSet& set,
                                         const Eigen::MatrixXd& s);

// Reciprocal-of-moving-average weights. Throws on non-positive averages.
Eigen::VectorXd loss_norm_weights(const Eigen::VectorXd& moving_averages);

// Exponential moving average of per-task loss magnitudes feeding
// loss_norm_weights. The first observation seeds the average directly.
class LossNormAverager {
public:
    explicit LossNormAverager(int tasks, double momentum = 0.99);

    void observe(const Eigen::VectorXd& losses);
    const Eigen::VectorXd& averages() const { return avg_; }
    Eigen::VectorXd weights() const { return loss_norm_weights(avg_); }

private:
    double momentum_;
    bool seeded_ = false;
    Eigen::VectorXd avg_;
};

}  // namespace motkit
