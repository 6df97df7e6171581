#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "gasolve/diffusion.hpp"
#include "gasolve/time_grid.hpp"

namespace gasolve {

/// History consumed by multistep updates. evals[j] is the data prediction
/// at (points[j], times[j]).
struct Trajectory {
  std::vector<Vec> points;
  std::vector<Vec> evals;
  std::vector<double> times;
};

State euler_step(const MixtureModel& model, const NoiseSchedule& schedule,
                 const State& state, double t_next);

Vec euler_solve(const MixtureModel& model, const NoiseSchedule& schedule,
                const TimeGrid& grid, const Vec& x_T);

/// DPM-Solver++(3M) update producing x_{n+1} from the history in `traj`
/// (data-prediction form, lambda = log(alpha / sigma)).
Vec dpmpp3m_step(const NoiseSchedule& schedule, const Trajectory& traj,
                 const TimeGrid& grid, std::size_t n);

Vec dpmpp3m_solve(const MixtureModel& model, const NoiseSchedule& schedule,
                  const TimeGrid& grid, const Vec& x_T);

/// Classical RK4 on the PF-ODE velocity over a log-SNR-uniform grid from
/// schedule.T down to schedule.delta.
Vec rk4_solve(const MixtureModel& model, const NoiseSchedule& schedule,
              const Vec& x_T, std::size_t substeps);

Vec rk4_solve(const MixtureModel& model, const NoiseSchedule& schedule,
              const TimeGrid& grid, const Vec& x_T);

enum class TeacherKind { Dpmpp3m, Rk4Oracle };
enum class GridKind { LogSnr, Polynomial };

struct TeacherConfig {
  TeacherKind kind = TeacherKind::Dpmpp3m;
  std::size_t nfe = 20;
  GridKind grid = GridKind::LogSnr;
  double rho = 1.0;
};

TimeGrid make_grid(GridKind kind, std::size_t N, double rho,
                   const NoiseSchedule& schedule);

Vec teacher_rollout(const MixtureModel& model, const NoiseSchedule& schedule,
                    const TeacherConfig& cfg, const Vec& x_T);

TeacherKind parse_teacher_kind(const std::string& s);
GridKind parse_grid_kind(const std::string& s);
std::string to_string(TeacherKind kind);
std::string to_string(GridKind kind);

}  // namespace gasolve
