#include <ezdl/reconstruct.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <string>
#include <thread>

#include <ezdl/error.hpp>
#include <ezdl/projection.hpp>
#include <ezdl/trainer.hpp>

namespace ezdl {

namespace {

void reconstruct_tile(const Dictionary& dict, const GrayImage& img, GrayImage& out, std::size_t x0, std::size_t y0,
                      std::size_t block, const InferenceConfig& cfg)
{
    std::vector<double> tile(block * block);
    read_block(img, x0, y0, block, tile);
    const auto [mean, std] = normalize_in_place(tile);
    if (std == 0.0) return;
    const std::vector<double> h = landweber_infer(dict, tile, cfg);
    std::vector<double> approx(dict.dim());
    multiply(dict.atoms, h, approx);
    const auto [approx_mean, approx_std] = normalize_in_place(approx);
    if (approx_std == 0.0) return;
    for (double& v : approx) v = mean + std * v;
    write_block(out, x0, y0, block, approx);
}

} // namespace

void validate(const InferenceConfig& cfg)
{
    if (!(cfg.sigma_i > 0.0 && cfg.sigma_i < 1.0)) throw Error(ErrorKind::InvalidConfig, "sigma_i must lie in (0, 1)");
    if (cfg.max_iters < 1) throw Error(ErrorKind::InvalidConfig, "max_iters must be at least 1");
    if (!(cfg.eta_init > 0.0)) throw Error(ErrorKind::InvalidConfig, "eta_init must be positive");
    if (!(cfg.grow > 1.0)) throw Error(ErrorKind::InvalidConfig, "grow must exceed 1");
    if (!(cfg.shrink > 0.0 && cfg.shrink < 1.0)) throw Error(ErrorKind::InvalidConfig, "shrink must lie in (0, 1)");
}

std::vector<double> landweber_infer(const Dictionary& dict, std::span<const double> x, const InferenceConfig& cfg,
                                    LandweberTrace* trace)
{
    validate(cfg);
    if (x.size() != dict.dim()) throw Error(ErrorKind::DimensionMismatch, "sample length does not match the atoms");
    const std::size_t n = dict.size();
    const Matrix& w = dict.atoms;

    std::vector<double> h(n);
    multiply_transposed(w, x, h);
    project_signed_into(h, h, cfg.sigma_i);

    std::vector<double> approx(dict.dim());
    multiply(w, h, approx);
    double objective = corrcoef(approx, x);
    double eta = cfg.eta_init;
    if (trace) {
        *trace = {};
        trace->objective.push_back(objective);
        trace->step.push_back(eta);
        trace->accepted.push_back(true);
    }

    std::vector<double> direction(n);
    std::vector<double> candidate(n);
    std::vector<double> candidate_approx(dict.dim());
    std::vector<double> grad;
    for (std::size_t it = 1; it < cfg.max_iters; ++it) {
        grad = corrcoef_grad(approx, x);
        multiply_transposed(w, grad, direction);
        for (std::size_t j = 0; j < n; ++j) candidate[j] = h[j] + eta * direction[j];

        bool accepted = false;
        double next = objective;
        try {
            project_signed_into(candidate, candidate, cfg.sigma_i);
            multiply(w, candidate, candidate_approx);
            next = corrcoef(candidate_approx, x);
            accepted = next > objective;
        } catch (const Error& e) {
            // A degenerate candidate is a rejected step.
            if (e.kind() != ErrorKind::ZeroVariance && e.kind() != ErrorKind::NonUniqueProjection &&
                e.kind() != ErrorKind::ZeroVector) {
                throw;
            }
        }
        if (accepted) {
            h.swap(candidate);
            approx.swap(candidate_approx);
            objective = next;
            eta *= cfg.grow;
        } else {
            eta *= cfg.shrink;
        }
        if (trace) {
            trace->objective.push_back(objective);
            trace->step.push_back(eta);
            trace->accepted.push_back(accepted);
        }
    }
    return h;
}

GrayImage reconstruct_image(const Dictionary& dict, const GrayImage& img, std::size_t block,
                            const InferenceConfig& cfg, std::size_t threads)
{
    validate(cfg);
    if (block == 0) throw Error(ErrorKind::InvalidConfig, "block size must be positive");
    if (dict.dim() != block * block) {
        throw Error(ErrorKind::DimensionMismatch, "atoms have dimension " + std::to_string(dict.dim()) +
                                                      ", blocks " + std::to_string(block * block));
    }
    GrayImage out = img;
    const std::size_t bx = img.width / block;
    const std::size_t by = img.height / block;
    const std::size_t tiles = bx * by;
    if (tiles == 0) return out;

    threads = std::clamp<std::size_t>(threads, 1, tiles);
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_lock;
    auto worker = [&] {
        for (std::size_t t = next++; t < tiles; t = next++) {
            try {
                reconstruct_tile(dict, img, out, (t % bx) * block, (t / bx) * block, block, cfg);
            } catch (...) {
                const std::lock_guard lock(failure_lock);
                if (!failure) failure = std::current_exception();
                next = tiles;
            }
        }
    };
    if (threads == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        pool.reserve(threads);
        for (std::size_t i = 0; i < threads; ++i) pool.emplace_back(worker);
    }
    if (failure) std::rethrow_exception(failure);
    return out;
}

} // namespace ezdl
