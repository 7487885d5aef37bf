#pragma once

#include <string>
#include <utility>
#include <vector>

#include "wage/network.hpp"

namespace wage {

// Piecewise-constant shift-based learning rate; drops are exponent changes.
struct EtaSchedule {
    std::vector<std::pair<int, PowerOfTwo>> points;  // (epoch, eta), epochs strictly increasing

    PowerOfTwo at(int epoch) const;
    // eta0 plus a drops string like "200:1,250:0.125"; every value must be an
    // exact power of two.
    static EtaSchedule parse(double eta0, const std::string& drops = "");
    std::string str() const;
};

enum class Backend { IntegerCodes, FloatSim };

struct TrainConfig {
    BitConfig bits;
    EtaSchedule eta = EtaSchedule::parse(1.0);
    PowerOfTwo gamma{0};
    int batch_size = 128;
    int epochs = 100;
    uint64_t seed = 1;
    Backend backend = Backend::IntegerCodes;
    InitParams init{};
    bool augment = false;  // pad-4 + random 32x32 crop (+ horizontal flip)
    bool flip = true;
    int eval_batch = 250;
};

// One trainable layer's persistent state. Weights live on the k_G grid;
// only an unconstrained G entry stores them as reals.
struct StoredLayer {
    FixedPointTensor w;
    FloatTensor w_real;
    Shape w_shape;
    PowerOfTwo alpha{0};
    int fan_in = 0;
};

struct NetworkState {
    NetworkSpec spec;
    BitConfig bits;
    std::vector<StoredLayer> layers;
    uint64_t step = 0;
    uint64_t grad_rng_state = 0;
    uint64_t seed = 0;
};

NetworkState build_network_state(const NetworkSpec& spec, const BitConfig& bits, uint64_t seed,
                                 const InitParams& init = {});

void save_checkpoint(const NetworkState& st, const std::string& path);
NetworkState load_checkpoint(const std::string& path, const InitParams& init = {});

// Quantized tensors observed at every operator of one step, for cross-checking
// the two backends and for histogram export.
struct StepTrace {
    std::vector<FixedPointTensor> w_q;   // per block
    std::vector<FixedPointTensor> a_q;   // block inputs; a_q[0] is the input batch
    FixedPointTensor a_out;              // final output on the activation grid
    std::vector<FixedPointTensor> e_q;   // per block
    std::vector<FixedPointTensor> dw;    // per block, step counts on the k_G grid
    std::vector<FloatTensor> dw_real;    // per block when G is unconstrained
};

struct StepStats {
    double loss = 0.0;
    int64_t e_saturated = 0;  // window-truncated error elements (diagnostic)
};

class Trainer {
public:
    Trainer(NetworkState& state, const TrainConfig& cfg);

    // Forward, backward and weight update on one quantized batch.
    StepStats train_step(const FixedPointTensor& x, const FixedPointTensor& targets,
                         PowerOfTwo eta, StepTrace* trace = nullptr);
    // Same entry for real-valued inputs (unconstrained-A runs, FloatSim only).
    StepStats train_step_real(const FloatTensor& x, const FloatTensor& targets, PowerOfTwo eta,
                              StepTrace* trace = nullptr);

    // Forward + SSE loss without touching any state.
    double loss_only(const FixedPointTensor& x, const FixedPointTensor& targets) const;
    double loss_only_real(const FloatTensor& x, const FloatTensor& targets) const;

    // Inference: argmax class per sample, ties to the lowest index. The
    // integer route uses the multiplication-free kernels when k_W == 2.
    std::vector<uint8_t> predict(const FixedPointTensor& x) const;
    std::vector<uint8_t> predict_real(const FloatTensor& x) const;

    const TrainConfig& config() const { return cfg_; }
    const std::vector<Block>& blocks() const { return blocks_; }
    NetworkState& state() { return st_; }

private:
    NetworkState& st_;
    TrainConfig cfg_;
    std::vector<Block> blocks_;
};

namespace data {
struct Dataset;
}

struct EpochRow {
    int epoch = 0;
    double train_loss = 0.0;
    double test_error = 0.0;
    int eta_exp = 0;
};

struct RunOptions {
    std::string out_dir;  // empty: nothing written
    std::string dataset_name;
    bool quiet = false;
};

struct RunResult {
    std::vector<EpochRow> rows;
    double final_test_error = 0.0;
};

// Full training protocol: per-epoch shuffle, optional augmentation, one
// evaluation per epoch, metrics/timing logs and a final checkpoint.
RunResult run_training(NetworkState& st, const TrainConfig& cfg, const data::Dataset& train,
                       const data::Dataset& test, const RunOptions& opt);

}  // namespace wage
