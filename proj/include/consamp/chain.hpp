#pragma once

#include "consamp/diagnostics.hpp"
#include "consamp/hmc.hpp"
#include "consamp/rng.hpp"

#include <algorithm>
#include <chrono>
#include <functional>

namespace consamp {

/// Runs `burnin + samples` transitions of `step` from `initial`, keeping the
/// last `samples` states mapped through `record` (e.g. sphere -> source
/// coordinates). Only the sampling loop is timed.
template <typename Step, typename Record>
ChainResult run_chain(Step&& step, Vector initial, long samples, long burnin, Rng& rng, Record&& record) {
  ChainResult out;
  Vector state = std::move(initial);
  const Vector first = record(state);
  out.draws.resize(samples, first.size());
  const auto t0 = std::chrono::steady_clock::now();
  for (long it = 0; it < burnin + samples; ++it) {
    StepResult r = step(state, rng);
    out.accepted += r.accepted ? 1 : 0;
    out.accept_prob_sum += r.accept_prob;
    out.bounces += r.bounces;
    state = std::move(r.position);
    if (it >= burnin) out.draws.row(it - burnin) = record(state).transpose();
  }
  const auto t1 = std::chrono::steady_clock::now();
  out.iterations = burnin + samples;
  out.seconds = std::max(std::chrono::duration<double>(t1 - t0).count(), 1e-9);
  return out;
}

template <typename Step>
ChainResult run_chain(Step&& step, Vector initial, long samples, long burnin, Rng& rng) {
  return run_chain(std::forward<Step>(step), std::move(initial), samples, burnin, rng,
                   [](const Vector& x) -> const Vector& { return x; });
}

}  // namespace consamp
