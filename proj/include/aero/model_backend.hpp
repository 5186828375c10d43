#pragma once

// Uniform model-backend surface for the three roles. Implementations:
// EndpointBackend (chat-completions wire) and SyntheticBackend (seeded
// simulation), both in backends.hpp.

#include <string>
#include <vector>

#include "aero/core.hpp"

namespace aero {

class ModelBackend {
public:
  virtual ~ModelBackend() = default;

  /// Synthesizes exactly `count` tasks for the given round, or throws.
  /// Never returns a silent partial batch.
  virtual std::vector<Task> generate_tasks(int count, int round) = 0;

  /// Samples exactly `count` solver trajectories for the task, with
  /// answers already extracted.
  virtual std::vector<Trajectory> sample_solutions(const Task& task, int count) = 0;

  /// One refiner pass over a suspected-flawed candidate solution.
  virtual Trajectory request_correction(const Task& task,
                                        const std::string& flawed_solution) = 0;
};

}  // namespace aero
