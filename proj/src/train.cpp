#include "straightkit/train.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <numeric>
#include <set>

namespace straightkit {

std::string to_string(TrainMode m) { return m == TrainMode::u_net_only ? "unet" : "pix2pix"; }

TrainMode train_mode_from_string(const std::string& s) {
    if (s == "unet" || s == "u_net_only") return TrainMode::u_net_only;
    if (s == "pix2pix") return TrainMode::pix2pix;
    throw DataError("unknown training mode: " + s);
}

void TrainConfig::validate() const {
    if (lr <= 0.0) throw DataError("lr must be > 0");
    if (lambda_l1 < 0.0) throw DataError("lambda must be >= 0");
    if (decay_factor <= 0.0 || decay_factor >= 1.0) throw DataError("decay factor must be in (0,1)");
    if (stop_patience < decay_patience) throw DataError("stop patience must be >= decay patience");
    if (batch < 1 || checks_per_epoch < 1 || depth < 2 || base_ch < 1)
        throw DataError("invalid training configuration");
}

// ---------------------------------------------------------------------------
// Adam with momentum coefficients (0.5, 0.999).
// ---------------------------------------------------------------------------

namespace {

class Adam {
public:
    explicit Adam(const ParamSet<float>& params, double beta1 = 0.5, double beta2 = 0.999,
                  double eps = 1e-8)
        : beta1_(beta1), beta2_(beta2), eps_(eps) {
        m_.reserve(params.size());
        v_.reserve(params.size());
        for (const auto& p : params) {
            m_.emplace_back(p.data->size(), 0.0f);
            v_.emplace_back(p.data->size(), 0.0f);
        }
    }

    void step(ParamSet<float>& params, double lr) {
        ++t_;
        const double bc1 = 1.0 - std::pow(beta1_, t_);
        const double bc2 = 1.0 - std::pow(beta2_, t_);
        for (size_t pi = 0; pi < params.size(); ++pi) {
            auto& data = *params[pi].data;
            auto& grad = *params[pi].grad;
            auto& m = m_[pi];
            auto& v = v_[pi];
            for (size_t i = 0; i < data.size(); ++i) {
                const double g = grad[i];
                m[i] = static_cast<float>(beta1_ * m[i] + (1.0 - beta1_) * g);
                v[i] = static_cast<float>(beta2_ * v[i] + (1.0 - beta2_) * g * g);
                const double mhat = m[i] / bc1;
                const double vhat = v[i] / bc2;
                data[i] = static_cast<float>(data[i] - lr * mhat / (std::sqrt(vhat) + eps_));
            }
        }
    }

private:
    double beta1_, beta2_, eps_;
    long t_ = 0;
    std::vector<std::vector<float>> m_, v_;
};

Tensor batch_tensor(const AugmentedDataset& ds, const std::vector<int>& order, size_t begin,
                    size_t end, bool condition) {
    const GrayImage& first = ds.pairs[order[begin]].x;
    Tensor t(static_cast<int>(end - begin), 1, first.height, first.width);
    for (size_t i = begin; i < end; ++i) {
        const TrainingPair& p = ds.pairs[order[i]];
        image_to_tensor(condition ? p.x : p.y, t, static_cast<int>(i - begin));
    }
    return t;
}

double validation_l1(UNet& gen, const AugmentedDataset& ds, const std::vector<int>& val,
                     int batch) {
    double sum = 0.0;
    size_t count = 0;
    for (size_t b = 0; b < val.size(); b += batch) {
        const size_t e = std::min(val.size(), b + batch);
        Tensor x = batch_tensor(ds, val, b, e, true);
        Tensor y = batch_tensor(ds, val, b, e, false);
        Tensor pred = gen.forward(x, false, nullptr);
        sum += l1_mean(pred, y) * static_cast<double>(pred.size());
        count += pred.size();
    }
    return sum / static_cast<double>(count);
}

Checkpoint snapshot(UNet& gen, const TrainConfig& cfg, int height, int width, double best_val,
                    int check_idx, double lr) {
    Checkpoint ckpt;
    for (const auto& p : gen.params())
        ckpt.tensors.push_back({p.name, p.shape, *p.data});
    char buf[64];
    auto put = [&](const std::string& k, const std::string& v) { ckpt.meta.emplace_back(k, v); };
    auto putd = [&](const std::string& k, double v) {
        std::snprintf(buf, sizeof(buf), "%.17g", v);
        put(k, buf);
    };
    put("role", "generator");
    put("mode", to_string(cfg.mode));
    put("depth", std::to_string(cfg.depth));
    put("base_ch", std::to_string(cfg.base_ch));
    put("height", std::to_string(height));
    put("width", std::to_string(width));
    put("seed", std::to_string(cfg.seed));
    put("batch", std::to_string(cfg.batch));
    putd("dropout", cfg.dropout);
    putd("lambda", cfg.lambda_l1);
    putd("best_val_loss", best_val);
    put("check_idx", std::to_string(check_idx));
    putd("lr", lr);
    return ckpt;
}

}  // namespace

TrainOutput train(const AugmentedDataset& ds, const TrainConfig& cfg, std::ostream* log) {
    cfg.validate();
    if (ds.train_indices.empty() || ds.val_indices.empty())
        throw DataError("training requires nonempty train and validation splits");
    const int height = ds.pairs[0].x.height;
    const int width = ds.pairs[0].x.width;

    UNet gen(cfg.depth, cfg.base_ch, cfg.dropout);
    PatchDiscriminator disc(cfg.base_ch);
    Rng init_rng(derive_seed(cfg.seed, 0));
    gen.init(init_rng);
    disc.init(init_rng);
    ParamSet<float> gen_params = gen.params();
    ParamSet<float> disc_params = disc.params();
    Adam opt_g(gen_params);
    Adam opt_d(disc_params);

    // One sequential stream drives epoch shuffles and dropout masks.
    Rng loop_rng(derive_seed(cfg.seed, 1));

    LrSchedule sched(cfg.lr, cfg.decay_patience, cfg.decay_factor, cfg.stop_patience);
    TrainOutput out;
    bool have_ckpt = false;
    int check_idx = 0;
    double window_l1 = 0.0, window_adv = 0.0;
    int window_steps = 0;

    std::vector<int> order = ds.train_indices;
    const int steps_per_epoch = static_cast<int>((order.size() + cfg.batch - 1) / cfg.batch);
    std::set<int> check_steps;
    for (int j = 1; j <= cfg.checks_per_epoch; ++j)
        check_steps.insert(std::max<int>(1, steps_per_epoch * j / cfg.checks_per_epoch));

    bool stop = false;
    for (int epoch = 0; epoch < cfg.max_epochs && !stop; ++epoch) {
        out.epochs = epoch + 1;
        for (int i = static_cast<int>(order.size()) - 1; i > 0; --i)
            std::swap(order[i], order[loop_rng.below(static_cast<uint64_t>(i) + 1)]);

        int epoch_step = 0;
        for (size_t b = 0; b < order.size() && !stop; b += cfg.batch) {
            const size_t e = std::min(order.size(), b + cfg.batch);
            Tensor x = batch_tensor(ds, order, b, e, true);
            Tensor y = batch_tensor(ds, order, b, e, false);

            Tensor y_pred = gen.forward(x, true, &loop_rng);
            const double step_l1 = l1_mean(y_pred, y);
            double step_adv = 0.0;

            if (cfg.mode == TrainMode::pix2pix) {
                // Discriminator update on the frozen fake.
                disc.zero_grad();
                Tensor d_real = disc.forward_joint(concat_channels(x, y));
                disc.backward(lsgan_mean_sq_grad(d_real, 1.0, 1.0));
                Tensor d_fake = disc.forward_joint(concat_channels(x, y_pred));
                disc.backward(lsgan_mean_sq_grad(d_fake, 0.0, 1.0));
                opt_d.step(disc_params, sched.lr());

                // Generator update: adversarial (fake -> 1) plus lambda * L1.
                Tensor d_fake2 = disc.forward_joint(concat_channels(x, y_pred));
                step_adv = lsgan_mean_sq(d_fake2, 1.0);
                Tensor g_joint = disc.backward(lsgan_mean_sq_grad(d_fake2, 1.0, 1.0));
                Tensor g_cond(g_joint.n, x.c, g_joint.h, g_joint.w);
                Tensor g_pred(g_joint.n, y.c, g_joint.h, g_joint.w);
                split_channels(g_joint, g_cond, g_pred);
                Tensor g_l1 = l1_mean_grad(y_pred, y, cfg.lambda_l1);
                for (size_t i = 0; i < g_pred.v.size(); ++i) g_pred.v[i] += g_l1.v[i];
                gen.zero_grad();
                gen.backward(g_pred);
                opt_g.step(gen_params, sched.lr());
            } else {
                gen.zero_grad();
                gen.backward(l1_mean_grad(y_pred, y, 1.0));
                opt_g.step(gen_params, sched.lr());
            }

            if (!std::isfinite(step_l1) || !std::isfinite(step_adv))
                throw TrainAbort("non-finite training loss at step " +
                                 std::to_string(out.steps + 1));

            ++out.steps;
            ++epoch_step;
            out.step_train_l1.push_back(step_l1);
            window_l1 += step_l1;
            window_adv += step_adv;
            ++window_steps;

            if (check_steps.count(epoch_step)) {
                const double val = validation_l1(gen, ds, ds.val_indices, cfg.batch);
                if (!std::isfinite(val)) throw TrainAbort("non-finite validation loss");
                const auto res = sched.observe(val);
                ++check_idx;
                CheckRecord rec;
                rec.check_idx = check_idx;
                rec.epoch = epoch;
                rec.lr = res.lr;
                rec.train_l1 = window_steps ? window_l1 / window_steps : 0.0;
                rec.train_adv = window_steps ? window_adv / window_steps : 0.0;
                rec.val_l1 = val;
                rec.improved = res.improved;
                out.checks.push_back(rec);
                window_l1 = window_adv = 0.0;
                window_steps = 0;
                if (log) {
                    char line[192];
                    if (cfg.mode == TrainMode::pix2pix)
                        std::snprintf(line, sizeof(line), "%d, %d, %.8g, %.8g, %.8g, %.8g\n",
                                      rec.check_idx, rec.epoch, rec.lr, rec.train_l1, rec.val_l1,
                                      rec.train_adv);
                    else
                        std::snprintf(line, sizeof(line), "%d, %d, %.8g, %.8g, %.8g\n",
                                      rec.check_idx, rec.epoch, rec.lr, rec.train_l1, rec.val_l1);
                    (*log) << line;
                }
                if (res.improved) {
                    out.checkpoint = snapshot(gen, cfg, height, width, val, check_idx, res.lr);
                    out.best_val = val;
                    have_ckpt = true;
                }
                if (res.stop) stop = true;
            }
            if (cfg.max_steps > 0 && out.steps >= cfg.max_steps) stop = true;
        }
    }

    if (!have_ckpt) {
        const double val = validation_l1(gen, ds, ds.val_indices, cfg.batch);
        out.checkpoint = snapshot(gen, cfg, height, width, val, check_idx, sched.lr());
        out.best_val = val;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Checkpoint file format.
// ---------------------------------------------------------------------------

namespace {

constexpr char kMagic[] = "STRAIGHTKIT-CKPT 1";

template <typename U>
void write_raw(std::ostream& os, U v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof(U));  // little-endian host
}

template <typename U>
U read_raw(std::istream& is) {
    U v{};
    is.read(reinterpret_cast<char*>(&v), sizeof(U));
    return v;
}

}  // namespace

const std::string* Checkpoint::find_meta(const std::string& key) const {
    for (const auto& [k, v] : meta)
        if (k == key) return &v;
    return nullptr;
}

double Checkpoint::meta_double(const std::string& key) const {
    const std::string* v = find_meta(key);
    if (!v) throw DataError("checkpoint metadata missing key: " + key);
    return std::stod(*v);
}

long Checkpoint::meta_long(const std::string& key) const {
    const std::string* v = find_meta(key);
    if (!v) throw DataError("checkpoint metadata missing key: " + key);
    return std::stol(*v);
}

void save_checkpoint(const Checkpoint& ckpt, const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw DataError("cannot write checkpoint: " + path);
    os << kMagic << "\n";
    for (const auto& [k, v] : ckpt.meta) os << k << " " << v << "\n";
    os << "DATA\n";
    write_raw<uint32_t>(os, static_cast<uint32_t>(ckpt.tensors.size()));
    for (const auto& t : ckpt.tensors) {
        write_raw<uint32_t>(os, static_cast<uint32_t>(t.name.size()));
        os.write(t.name.data(), static_cast<std::streamsize>(t.name.size()));
        write_raw<uint32_t>(os, static_cast<uint32_t>(t.shape.size()));
        for (int d : t.shape) write_raw<uint32_t>(os, static_cast<uint32_t>(d));
        write_raw<uint64_t>(os, static_cast<uint64_t>(t.values.size()));
        os.write(reinterpret_cast<const char*>(t.values.data()),
                 static_cast<std::streamsize>(t.values.size() * sizeof(float)));
    }
    if (!os) throw DataError("checkpoint write failed: " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw DataError("cannot open checkpoint: " + path);
    std::string line;
    if (!std::getline(is, line) || line != kMagic)
        throw DataError("not a checkpoint file: " + path);
    Checkpoint ckpt;
    while (std::getline(is, line)) {
        if (line == "DATA") break;
        const auto sp = line.find(' ');
        if (sp == std::string::npos) throw DataError("malformed checkpoint header: " + path);
        ckpt.meta.emplace_back(line.substr(0, sp), line.substr(sp + 1));
    }
    const uint32_t count = read_raw<uint32_t>(is);
    for (uint32_t i = 0; i < count; ++i) {
        Checkpoint::Entry e;
        const uint32_t name_len = read_raw<uint32_t>(is);
        e.name.resize(name_len);
        is.read(e.name.data(), name_len);
        const uint32_t ndim = read_raw<uint32_t>(is);
        e.shape.resize(ndim);
        for (uint32_t d = 0; d < ndim; ++d) e.shape[d] = static_cast<int>(read_raw<uint32_t>(is));
        const uint64_t n = read_raw<uint64_t>(is);
        e.values.resize(n);
        is.read(reinterpret_cast<char*>(e.values.data()),
                static_cast<std::streamsize>(n * sizeof(float)));
        if (!is) throw DataError("truncated checkpoint: " + path);
        ckpt.tensors.push_back(std::move(e));
    }
    return ckpt;
}

GrayImage straighten(const Checkpoint& ckpt, const GrayImage& vertical_backbone) {
    const int depth = static_cast<int>(ckpt.meta_long("depth"));
    const int base = static_cast<int>(ckpt.meta_long("base_ch"));
    const int height = static_cast<int>(ckpt.meta_long("height"));
    const int width = static_cast<int>(ckpt.meta_long("width"));
    if (vertical_backbone.height != height || vertical_backbone.width != width)
        throw DataError("backbone resolution mismatch with checkpoint: expected " +
                        std::to_string(width) + "x" + std::to_string(height));

    UNet gen(depth, base, ckpt.meta_double("dropout"));
    ParamSet<float> params = gen.params();
    for (auto& p : params) {
        const Checkpoint::Entry* found = nullptr;
        for (const auto& t : ckpt.tensors)
            if (t.name == p.name) { found = &t; break; }
        if (!found) throw DataError("checkpoint missing tensor: " + p.name);
        if (found->values.size() != p.data->size())
            throw DataError("checkpoint tensor size mismatch: " + p.name);
        *p.data = found->values;
    }

    Tensor x(1, 1, height, width);
    image_to_tensor(vertical_backbone, x, 0);
    Tensor y = gen.forward(x, false, nullptr);
    return tensor_to_image(y, 0);
}

}  // namespace straightkit
