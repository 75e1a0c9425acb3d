#pragma once

#include <limits>
#include <ostream>
#include <string>
#include <vector>

#include "straightkit/augment.hpp"
#include "straightkit/nets.hpp"

namespace straightkit {

enum class TrainMode { u_net_only, pix2pix };

std::string to_string(TrainMode m);
TrainMode train_mode_from_string(const std::string& s);

struct TrainConfig {
    double lr = 4e-5;          // initial learning rate
    double lambda_l1 = 100.0;  // L1 weight in the combined objective
    int batch = 4;
    int checks_per_epoch = 3;
    int decay_patience = 9;     // stale checks before each LR decay
    double decay_factor = 0.8;
    int stop_patience = 27;     // stale checks before termination
    int max_epochs = 200;
    long max_steps = 0;  // 0 = unlimited; small-scale runs cap the step count
    uint64_t seed = 1;
    double dropout = 0.5;
    int depth = 4;
    int base_ch = 16;
    TrainMode mode = TrainMode::u_net_only;

    void validate() const;
};

// Validation-driven schedule: an improving check saves the best weights and
// resets staleness; staleness hitting each multiple of decay_patience
// reduces the learning rate to decay_factor of itself; staleness reaching
// stop_patience terminates training.
class LrSchedule {
public:
    LrSchedule(double lr, int decay_patience, double decay_factor, int stop_patience)
        : lr_(lr), decay_patience_(decay_patience), decay_factor_(decay_factor),
          stop_patience_(stop_patience) {}

    struct Outcome {
        bool improved = false;
        bool stop = false;
        double lr = 0.0;
    };

    Outcome observe(double val_loss) {
        Outcome o;
        if (val_loss < best_) {
            best_ = val_loss;
            stale_ = 0;
            o.improved = true;
        } else {
            ++stale_;
            if (stale_ >= stop_patience_) {
                o.stop = true;
            } else if (stale_ % decay_patience_ == 0) {
                lr_ *= decay_factor_;
            }
        }
        o.lr = lr_;
        return o;
    }

    double lr() const { return lr_; }
    double best() const { return best_; }
    int stale() const { return stale_; }

private:
    double lr_;
    int decay_patience_;
    double decay_factor_;
    int stop_patience_;
    double best_ = std::numeric_limits<double>::infinity();
    int stale_ = 0;
};

// Persisted best generator weights plus training metadata.
struct Checkpoint {
    struct Entry {
        std::string name;
        std::vector<int> shape;
        std::vector<float> values;
    };
    std::vector<Entry> tensors;
    std::vector<std::pair<std::string, std::string>> meta;

    const std::string* find_meta(const std::string& key) const;
    double meta_double(const std::string& key) const;
    long meta_long(const std::string& key) const;
};

// Text metadata header followed by length-prefixed binary records of
// (name, shape, little-endian float32 values). Round trips bit-exactly.
void save_checkpoint(const Checkpoint& ckpt, const std::string& path);
Checkpoint load_checkpoint(const std::string& path);

struct CheckRecord {
    int check_idx = 0;
    int epoch = 0;
    double lr = 0.0;
    double train_l1 = 0.0;
    double val_l1 = 0.0;
    double train_adv = 0.0;
    bool improved = false;
};

struct TrainOutput {
    Checkpoint checkpoint;
    std::vector<double> step_train_l1;  // L1 component per update step
    std::vector<CheckRecord> checks;
    double best_val = 0.0;
    int steps = 0;
    int epochs = 0;
};

// Deterministic training loop per the validation-check protocol above.
// `log` (optional) receives one line per check:
//   check_idx, epoch, lr, train_L1, val_L1[, train_adv]
TrainOutput train(const AugmentedDataset& ds, const TrainConfig& cfg, std::ostream* log = nullptr);

// normalize -> generator (inference mode) -> denormalize.
GrayImage straighten(const Checkpoint& ckpt, const GrayImage& vertical_backbone);

}  // namespace straightkit
