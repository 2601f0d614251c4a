#include "chronon/classical.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace chronon::classical {

namespace {

constexpr double c_light = Constants::c_cm_per_s;

Vec3 lorentz_force(const ParticleParams& p, const Vec3& E, const Vec3& B, const Vec3& v) {
  return p.charge * (E + v.cross(B) / c_light);
}

// Solves v + a x v = w (the retarded non-relativistic system with a = alpha B).
// The matrix I + [a]_x has determinant 1 + |a|^2 > 0, so the inverse is explicit.
Vec3 solve_cross_system(const Vec3& a, const Vec3& w) {
  const double det = 1.0 + a.squaredNorm();
  return (w - a.cross(w) + a.dot(w) * a) / det;
}

double scale_of(const Vec3& x, const Vec3& dx) { return x.norm() + dx.norm(); }

FourVelocity four_velocity_of(const WorldlinePoint& p) {
  return p.four_velocity ? *p.four_velocity : FourVelocity::from_velocity(p.velocity);
}

// Projector orthogonal to a unit (in units of c) four-velocity: P(u) v = v + u <u, v>.
Vec4 project_orthogonal(const Vec4& u_hat, const Vec4& v) {
  return v + u_hat * minkowski(u_hat, v);
}

Vec4 on_shell(const Vec3& w_hat) {
  Vec4 u;
  u << std::sqrt(1.0 + w_hat.squaredNorm()), w_hat;
  return u;
}

WorldlinePoint make_rel_point(const WorldlinePoint& from, double proper_time, const Vec4& x_new,
                              const Vec4& u_hat) {
  WorldlinePoint p;
  p.tick = from.tick + 1;
  p.time = proper_time;
  p.lab_time = x_new(0) / c_light;
  p.position = x_new.tail<3>();
  p.four_velocity = FourVelocity::from_spatial(u_hat.tail<3>() * c_light);
  p.velocity = p.four_velocity->velocity();
  return p;
}

Vec4 four_position(const WorldlinePoint& p) {
  Vec4 x;
  x << c_light * p.lab_time, p.position;
  return x;
}

void require_previous(const WorldlinePoint* previous) {
  if (previous == nullptr) {
    throw ValidationError("previous", "symmetric scheme needs the point at tick n-1");
  }
}

// Newton solve of the retarded relativistic equation for the spatial part of
// u(n), with u^0 eliminated through the mass shell. Units of c throughout:
//   -u_p - u <u, u_p> - kappa F u = 0   (spatial components)
Vec3 solve_retarded_rel(const Vec4& u_prev, const Mat4& F, double kappa,
                        const StepOptions& options) {
  auto residual = [&](const Vec3& w) -> Vec3 {
    const Vec4 u = on_shell(w);
    const Vec4 fu = F * u;
    return -u_prev.tail<3>() - w * minkowski(u, u_prev) - kappa * fu.tail<3>();
  };

  Vec3 w = u_prev.tail<3>();
  Vec3 g = residual(w);
  for (int it = 0; it < options.max_iterations; ++it) {
    const Vec4 u = on_shell(w);
    const double u0 = u(0);
    const double dot = minkowski(u, u_prev);
    Eigen::Matrix3d J;
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) {
        const double ddot = -u_prev(0) * w(j) / u0 + u_prev(j + 1);
        const double dfu = F(i + 1, 0) * w(j) / u0 + F(i + 1, j + 1);
        J(i, j) = (i == j ? -dot : 0.0) - w(i) * ddot - kappa * dfu;
      }
    }
    const Vec3 delta = J.partialPivLu().solve(-g);
    if (!delta.allFinite()) break;

    // Damping: halve the step until the residual does not grow.
    double lambda = 1.0;
    Vec3 w_try = w + delta;
    Vec3 g_try = residual(w_try);
    for (int h = 0; h < 30 && g_try.norm() > g.norm() && g.norm() > 0.0; ++h) {
      lambda *= 0.5;
      w_try = w + lambda * delta;
      g_try = residual(w_try);
    }
    w = w_try;
    g = g_try;
    if ((lambda * delta).norm() <= options.tolerance * u0 || g.norm() == 0.0) return w;
  }
  throw SimulationError("relativistic retarded step did not converge", g.norm());
}

}  // namespace

ParticleParams::ParticleParams(double charge_esu, double mass_g, double tau0_s)
    : charge(charge_esu), mass(mass_g), tau0(tau0_s) {
  if (!(mass > 0.0) || !std::isfinite(mass)) throw DomainError("mass", "must be > 0");
  if (!std::isfinite(charge)) throw ValidationError("charge", "must be finite");
  if (!(tau0 > 0.0) || !std::isfinite(tau0)) throw ValidationError("tau0", "must be > 0");
}

ParticleParams ParticleParams::electron() {
  return {Constants::e_esu, Constants::m_e_g, chronon_of(Constants::e_esu, Constants::m_e_g, true)};
}

double minkowski(const Vec4& a, const Vec4& b) {
  return -a(0) * b(0) + a(1) * b(1) + a(2) * b(2) + a(3) * b(3);
}

FourVelocity FourVelocity::from_spatial(const Vec3& w) {
  FourVelocity f;
  f.u << std::sqrt(c_light * c_light + w.squaredNorm()), w;
  return f;
}

FourVelocity FourVelocity::from_velocity(const Vec3& v) {
  const double beta_sq = v.squaredNorm() / (c_light * c_light);
  if (!(beta_sq < 1.0)) throw ValidationError("velocity", "must be below c");
  return from_spatial(v / std::sqrt(1.0 - beta_sq));
}

double FourVelocity::shell_residual() const {
  return std::abs(minkowski(u, u) + c_light * c_light) / (c_light * c_light);
}

EMField EMField::none() { return uniform(Vec3::Zero(), Vec3::Zero()); }

EMField EMField::uniform(const Vec3& e, const Vec3& b) {
  return {[e](double, const Vec3&) { return e; }, [b](double, const Vec3&) { return b; }};
}

Mat4 EMField::tensor(double t, const Vec3& x) const {
  const Vec3 e = E(t, x);
  const Vec3 b = B(t, x);
  Mat4 f = Mat4::Zero();
  for (int i = 0; i < 3; ++i) {
    f(0, i + 1) = -e(i);
    f(i + 1, 0) = e(i);
  }
  f(1, 2) = b(2);
  f(2, 1) = -b(2);
  f(2, 3) = b(0);
  f(3, 2) = -b(0);
  f(3, 1) = b(1);
  f(1, 3) = -b(1);
  return f;
}

Mat4 EMField::mixed_tensor(double t, const Vec3& x) const {
  Mat4 f = tensor(t, x);
  f.row(0) *= -1.0;  // raise the first index with eta = diag(-1, 1, 1, 1)
  return f;
}

double WorldlinePoint::kinetic_energy(double mass) const {
  if (four_velocity) return (four_velocity->lorentz_factor() - 1.0) * mass * c_light * c_light;
  return 0.5 * mass * velocity.squaredNorm();
}

WorldlinePoint step_nonrel(Variant scheme, const WorldlinePoint& current,
                           const WorldlinePoint* previous, const EMField& field,
                           const ParticleParams& params, const StepOptions& options) {
  const double tau0 = params.tau0;
  WorldlinePoint next;
  next.tick = current.tick + 1;
  next.time = current.time + tau0;
  next.lab_time = next.time;

  switch (scheme) {
    case Variant::Retarded: {
      // Fields act at the new tick; its position depends on v(n) through the
      // transmission law, so iterate on the position.
      Vec3 x_guess = current.position + tau0 * current.velocity;
      for (int it = 0;; ++it) {
        const Vec3 E = field.E(next.time, x_guess);
        const Vec3 B = field.B(next.time, x_guess);
        const Vec3 alpha_b = (params.charge * tau0 / (params.mass * c_light)) * B;
        const Vec3 rhs = current.velocity + (params.charge * tau0 / params.mass) * E;
        next.velocity = solve_cross_system(alpha_b, rhs);
        const Vec3 dv = options.transmission == Transmission::Averaged
                            ? Vec3(next.velocity + current.velocity)
                            : Vec3(next.velocity - current.velocity);
        next.position = current.position + 0.5 * tau0 * dv;
        const double change = (next.position - x_guess).norm();
        if (change <= options.tolerance * scale_of(next.position, 0.5 * tau0 * dv)) break;
        if (it + 1 >= options.max_iterations) {
          throw SimulationError("retarded step: position iteration did not converge", change);
        }
        x_guess = next.position;
      }
      break;
    }
    case Variant::Advanced: {
      const Vec3 E = field.E(current.time, current.position);
      const Vec3 B = field.B(current.time, current.position);
      next.velocity = current.velocity +
                      (tau0 / params.mass) * lorentz_force(params, E, B, current.velocity);
      next.position = current.position + tau0 * current.velocity;
      break;
    }
    case Variant::Symmetric: {
      require_previous(previous);
      const Vec3 E = field.E(current.time, current.position);
      const Vec3 B = field.B(current.time, current.position);
      next.velocity = previous->velocity +
                      (2.0 * tau0 / params.mass) * lorentz_force(params, E, B, current.velocity);
      next.position = previous->position + 2.0 * tau0 * current.velocity;
      break;
    }
  }
  return next;
}

WorldlinePoint step_rel(Variant scheme, const WorldlinePoint& current,
                        const WorldlinePoint* previous, const EMField& field,
                        const ParticleParams& params, const StepOptions& options) {
  const double tau0 = params.tau0;
  const double kappa = params.charge * tau0 / (params.mass * c_light);
  const Vec4 u_hat = four_velocity_of(current).u / c_light;
  if (std::abs(minkowski(u_hat, u_hat) + 1.0) > 1e-9) {
    throw ValidationError("four_velocity", "input is off the mass shell");
  }
  const Vec4 x = four_position(current);
  const double proper_time = current.time + tau0;

  switch (scheme) {
    case Variant::Retarded: {
      Vec4 x_guess = x + tau0 * c_light * u_hat;
      for (int it = 0;; ++it) {
        const Mat4 F = field.mixed_tensor(x_guess(0) / c_light, x_guess.tail<3>());
        // No force: u(n) = u(n-1) solves the system exactly, skip the solver's roundoff.
        const bool force_free = (F * u_hat).isZero(0.0);
        const Vec4 u_new = force_free ? u_hat : on_shell(solve_retarded_rel(u_hat, F, kappa, options));
        const Vec4 du = options.transmission == Transmission::Averaged ? Vec4(u_new + u_hat)
                                                                       : Vec4(u_new - u_hat);
        const Vec4 x_new = x + 0.5 * tau0 * c_light * du;
        const double change = (x_new - x_guess).norm();
        if (change <= options.tolerance * (x_new.norm() + tau0 * c_light * du.norm())) {
          WorldlinePoint p = make_rel_point(current, proper_time, x_new, u_new);
          if (force_free) {
            p.four_velocity = four_velocity_of(current);
            p.velocity = current.velocity;
          }
          return p;
        }
        if (it + 1 >= options.max_iterations) {
          throw SimulationError("relativistic retarded step: event iteration did not converge",
                                change);
        }
        x_guess = x_new;
      }
    }
    case Variant::Advanced: {
      // P(u)[u(n+1) - u(n)] = kappa F u: u(n+1) = lambda u + a with a orthogonal
      // to u and lambda fixed by the mass shell.
      const Mat4 F = field.mixed_tensor(current.lab_time, current.position);
      const Vec4 a = kappa * (F * u_hat);
      const double lambda = std::sqrt(1.0 + minkowski(a, a));
      const Vec4 u_new = on_shell((lambda * u_hat + a).tail<3>());
      return make_rel_point(current, proper_time, x + tau0 * c_light * u_hat, u_new);
    }
    case Variant::Symmetric: {
      require_previous(previous);
      const Vec4 u_prev = four_velocity_of(*previous).u / c_light;
      const Mat4 F = field.mixed_tensor(current.lab_time, current.position);
      const Vec4 b = project_orthogonal(u_hat, u_prev) + 2.0 * kappa * (F * u_hat);
      const double lambda = std::sqrt(1.0 + minkowski(b, b));
      const Vec4 u_new = on_shell((lambda * u_hat + b).tail<3>());
      const Vec4 x_new = four_position(*previous) + 2.0 * tau0 * c_light * u_hat;
      return make_rel_point(current, proper_time, x_new, u_new);
    }
  }
  throw ValidationError("scheme", "unknown variant");
}

EMField field_for(const Scenario& s, const ParticleParams& params) {
  return std::visit(
      [&](const auto& sc) -> EMField {
        using T = std::decay_t<decltype(sc)>;
        if constexpr (std::is_same_v<T, scenario::FreeMotion>) {
          return EMField::none();
        } else if constexpr (std::is_same_v<T, scenario::UniformB>) {
          return EMField::uniform(Vec3::Zero(), sc.B);
        } else if constexpr (std::is_same_v<T, scenario::ConstantE>) {
          return EMField::uniform(sc.E, Vec3::Zero());
        } else if constexpr (std::is_same_v<T, scenario::ElasticLine>) {
          if (sc.axis < 0 || sc.axis > 2) throw ValidationError("axis", "must be 0, 1 or 2");
          if (!(sc.spring_constant >= 0.0)) {
            throw ValidationError("spring_constant", "must be >= 0");
          }
          if (params.charge == 0.0) {
            throw ValidationError("charge", "elastic force is applied through the charge");
          }
          const double k_over_e = sc.spring_constant / params.charge;
          const int axis = sc.axis;
          EMField f = EMField::none();
          f.E = [k_over_e, axis](double, const Vec3& x) {
            Vec3 e = Vec3::Zero();
            e(axis) = -k_over_e * x(axis);
            return e;
          };
          return f;
        } else {
          if (sc.onset < 0) throw ValidationError("onset", "must be >= 0");
          if (sc.duration < 1) throw ValidationError("duration", "must be >= 1 tick");
          const double t_on = static_cast<double>(sc.onset) * params.tau0;
          const double width = static_cast<double>(sc.duration) * params.tau0;
          const Vec3 amp = sc.amplitude;
          EMField f = EMField::none();
          f.E = [t_on, width, amp](double t, const Vec3&) -> Vec3 {
            if (t < t_on || t > t_on + width) return Vec3::Zero();
            return amp * std::sin(std::numbers::pi * (t - t_on) / width);
          };
          return f;
        }
      },
      s);
}

std::vector<WorldlinePoint> simulate(const Scenario& s, Variant scheme,
                                     const ParticleParams& params, std::int64_t steps,
                                     bool relativistic, const StepOptions& options) {
  if (steps < 0) throw ValidationError("steps", "must be >= 0");
  const EMField field = field_for(s, params);

  WorldlinePoint start;
  std::visit(
      [&](const auto& sc) {
        start.position = sc.x0;
        start.velocity = sc.v0;
      },
      s);
  if (!start.position.allFinite() || !start.velocity.allFinite()) {
    throw ValidationError("initial", "position and velocity must be finite");
  }
  if (relativistic) start.four_velocity = FourVelocity::from_velocity(start.velocity);

  auto step = [&](Variant v, const WorldlinePoint& cur, const WorldlinePoint* prev) {
    return relativistic ? step_rel(v, cur, prev, field, params, options)
                        : step_nonrel(v, cur, prev, field, params, options);
  };

  std::vector<WorldlinePoint> line;
  line.reserve(static_cast<std::size_t>(steps) + 1);
  line.push_back(start);
  for (std::int64_t k = 1; k <= steps; ++k) {
    const WorldlinePoint& cur = line.back();
    if (scheme == Variant::Symmetric && k == 1) {
      line.push_back(step(Variant::Retarded, cur, nullptr));
    } else {
      const WorldlinePoint* prev = line.size() >= 2 ? &line[line.size() - 2] : nullptr;
      line.push_back(step(scheme, cur, prev));
    }
  }
  return line;
}

InternalSolution internal_solution_check(const ParticleParams& params, int samples) {
  // (gamma - 1) m c^2 = m c^2  =>  gamma = 2
  const double lorentz = 2.0;
  const double beta0 = std::sqrt(1.0 - 1.0 / (lorentz * lorentz));
  InternalSolution out{beta0, 1.0 / std::sqrt(1.0 - beta0 * beta0), 0.0, 0.0};
  out.kinetic_energy_ratio = (out.lorentz_factor - 1.0) * params.mass * c_light * c_light /
                             (params.mass * c_light * c_light);
  for (int j = 0; j < samples; ++j) {
    const double phase = 2.0 * std::numbers::pi * j / samples;  // 2 pi tau / tau0
    const double vx = -beta0 * c_light * std::sin(phase);
    const double vy = -beta0 * c_light * std::cos(phase);
    out.max_speed_deviation =
        std::max(out.max_speed_deviation, std::abs(std::hypot(vx, vy) - beta0 * c_light) / c_light);
  }
  return out;
}

AnomalousMoment anomalous_moment(const ParticleParams& params) {
  const double e = params.charge;
  const double m = params.mass;
  const double mu_a = e * e * e / (4.0 * std::numbers::pi * m * c_light * c_light);
  const double bohr = e * Constants::hbar_erg_s / (2.0 * m * c_light);
  return {mu_a, mu_a / bohr};
}

ALState step_abraham_lorentz(const ALState& state, const EMField& field, double dt,
                             const ParticleParams& params) {
  if (!(dt > 0.0)) throw ValidationError("dt", "must be > 0");
  const double theta0 = chronon_of(params.charge, params.mass);

  struct Deriv {
    Vec3 dr, dv, da;
  };
  auto f = [&](double t, const Vec3& r, const Vec3& v, const Vec3& a) -> Deriv {
    const Vec3 force = lorentz_force(params, field.E(t, r), field.B(t, r), v);
    return {v, a, (a - force / params.mass) / theta0};
  };

  const double t = state.time;
  const Vec3& r = state.position;
  const Vec3& v = state.velocity;
  const Vec3& a = state.acceleration;
  const Deriv k1 = f(t, r, v, a);
  const Deriv k2 = f(t + dt / 2, r + dt / 2 * k1.dr, v + dt / 2 * k1.dv, a + dt / 2 * k1.da);
  const Deriv k3 = f(t + dt / 2, r + dt / 2 * k2.dr, v + dt / 2 * k2.dv, a + dt / 2 * k2.da);
  const Deriv k4 = f(t + dt, r + dt * k3.dr, v + dt * k3.dv, a + dt * k3.da);

  ALState next;
  next.time = t + dt;
  next.position = r + dt / 6 * (k1.dr + 2 * k2.dr + 2 * k3.dr + k4.dr);
  next.velocity = v + dt / 6 * (k1.dv + 2 * k2.dv + 2 * k3.dv + k4.dv);
  next.acceleration = a + dt / 6 * (k1.da + 2 * k2.da + 2 * k3.da + k4.da);
  return next;
}

double runaway_rate(const std::vector<ALState>& worldline, double dt) {
  if (!(dt > 0.0)) throw ValidationError("dt", "must be > 0");
  std::vector<double> ts;
  std::vector<double> ys;
  for (std::size_t i = 0; i < worldline.size(); ++i) {
    const double mag = worldline[i].acceleration.norm();
    if (mag > 0.0 && std::isfinite(mag)) {
      ts.push_back(static_cast<double>(i) * dt);
      ys.push_back(std::log(mag));
    }
  }
  if (ts.size() < 10) {
    throw ValidationError("worldline", "need at least 10 samples with |a| > 0");
  }
  const double n = static_cast<double>(ts.size());
  double t_mean = 0.0;
  double y_mean = 0.0;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    t_mean += ts[i] / n;
    y_mean += ys[i] / n;
  }
  double sty = 0.0;
  double stt = 0.0;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    sty += (ts[i] - t_mean) * (ys[i] - y_mean);
    stt += (ts[i] - t_mean) * (ts[i] - t_mean);
  }
  const double slope = sty / stt;
  if (slope * (ts.back() - ts.front()) < -1e-9) {
    throw ValidationError("worldline", "|a| is not growing (fitted slope is negative)");
  }
  return slope;
}

}  // namespace chronon::classical
