#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "diner/coord_table.hpp"
#include "diner/grid.hpp"
#include "diner/network.hpp"

namespace diner {

/// A fitting target: a Grid whose values live in [0,1].
using SampleSet = Grid;

/// Throws unless values are finite and inside [0,1].
void validate_sample_set(const SampleSet& data);

enum class Process { Identity, Lensless };

struct TrainConfig {
    std::size_t epochs = 3000;
    std::size_t batch_size = 0; // 0 = full batch
    double lr_net = 1e-3;
    double lr_table = -1.0;     // negative = same as lr_net; 0 freezes the table
    std::uint64_t seed = 0;
    bool use_table = true;
    Process process = Process::Identity;
    std::size_t log_every = 100;
    int threads = 1;            // accepted for compatibility; compute is single-threaded
};

struct MetricsRow {
    std::size_t epoch;
    double loss;
    double psnr_db;
    double wall_ms;
};

struct MetricsLog {
    std::vector<MetricsRow> rows;
    const MetricsRow& final_row() const { return rows.back(); }
};

/// CSV with header "epoch,loss,psnr_db,wall_ms".
void write_csv(const MetricsLog& log, std::ostream& os);

struct Model {
    Backbone backbone;
    std::optional<CoordTable> table;
};

/// Network optimizer state, one Adam state per layer weight/bias.
struct FitState {
    std::vector<AdamState> weight_state;
    std::vector<AdamState> bias_state;
    std::uint64_t epoch = 0;
};

/// Fits the model to the signal with L2 loss and Adam. Full-batch mode takes
/// one optimizer step per epoch over the summed gradient; the per-sample
/// gradient reduction runs in ascending target-value order (ties grouped),
/// which is invariant under any rearrangement of the signal and makes
/// disorder-invariance hold to machine precision. Mini-batches shuffle
/// deterministically per epoch and reduce in ascending element order.
/// Identity process only; lensless fitting lives in reconstruct().
MetricsLog fit(Model& model, FitState& fs, const SampleSet& data, const TrainConfig& cfg);

/// Convenience overload with a fresh optimizer state.
MetricsLog fit(Model& model, const SampleSet& data, const TrainConfig& cfg);

/// 10*log10(1/MSE) over values clamped to [0,1]; +inf when MSE == 0.
double psnr(const Grid& a, const Grid& b);

/// Evaluates the model at every element (table rows when present, lattice
/// coordinates otherwise) and clamps to [0,1].
Grid render_signal(const Model& model, const std::vector<std::size_t>& extents);

enum class Order { Identity, SortedByIntensity, Random };

struct Rearranged {
    SampleSet data;
    std::vector<std::uint32_t> perm; // out value j == in value perm[j]
};

/// Permutes values onto the same lattice. SortedByIntensity sorts ascending
/// by luminance (0.299R+0.587G+0.114B for 3 channels, channel mean
/// otherwise), ties broken by original flat index.
Rearranged rearrange(const SampleSet& data, Order order, std::uint64_t seed);

struct InvarianceReport {
    std::vector<Order> orders;
    std::vector<double> psnr_db;       // per order
    double max_psnr_gap_db = 0.0;      // max pairwise |delta PSNR|
    double max_table_residual = 0.0;   // max per-entry residual after aligning by the permutations
};

/// Trains one DINER per order with identical seeds and Zero table init
/// (enforced), then compares outcomes.
InvarianceReport invariance_report(const SampleSet& data, const BackboneSpec& spec,
                                   const TrainConfig& cfg, std::span<const Order> orders);

} // namespace diner
