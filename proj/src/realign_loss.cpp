#include "af/realign_loss.hpp"

#include <atomic>

namespace af::realign {

namespace {
std::atomic<uint64_t> g_loss_evals{0};
}

uint64_t loss_eval_count() {
    return g_loss_evals.load();
}

void reset_loss_eval_count() {
    g_loss_evals.store(0);
}

void bump_loss_eval_count() {
    g_loss_evals.fetch_add(1);
}

} // namespace af::realign
