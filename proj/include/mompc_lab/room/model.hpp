#pragma once

// Room climate benchmark: a three-state model (temperature, absolute
// humidity, CO2 concentration) driven by floor heating, ventilation with
// recirculation, supply-air conditioning, and central humidification, under
// held occupancy/weather disturbances.  The humidity group is scaled by s_h
// and the floor power by s_P; all functions here speak the scaled units
// unless their name says otherwise.  The money model prices electrical power
// in EUR per hour with the smooth absolute value |x|_L = sqrt(x^2 + 1/L).
//
// Layouts:
//   state        x = (T [degC], h [scaled kg/kg], c [ppm])
//   input        u = (P_floor [scaled W], alpha_mix, Q_vent [m^3/s],
//                     dT_cond [degC], g_humid [scaled kg/s])
//   disturbance  d = (N_occ, T_out [degC], S_solar [W/m^2],
//                     mdot_h_dist [scaled kg/s])

#include <cmath>

#include "mompc_lab/core/errors.hpp"
#include "mompc_lab/core/linalg.hpp"
#include "mompc_lab/mpc/discretize.hpp"
#include "mompc_lab/mpc/terminal.hpp"

namespace mompc_lab::room {

struct RoomParams {
    double rho_air = 1.2;         // air density, kg/m^3
    double c_p_air = 1005.0;      // specific heat of air, J/(kg K)
    double v_r = 40.0;            // room volume, m^3
    double c_r = 0.9e6;           // thermal capacity, J/K
    double r_rw = 0.012;          // wall resistance, K/W
    double p_occ = 120.0;         // heat per occupant, W
    double mdot_c_occ = 6.2;      // CO2 per occupant, ppm kg/s (as printed)
    double mdot_h_occ = 1.39e-5;  // moisture per occupant, kg/s
    double alpha_solar = 0.6;     // transmittance
    double a_solar = 1.0;         // window area, m^2
    double c_out = 500.0;         // outdoor CO2, ppm
    double h_out = 5e-3;          // outdoor humidity, kg/kg
    double p_sfp = 1000.0;        // specific fan power, W/(m^3/s)
    double h_vap = 2.45e6;        // evaporation enthalpy, J/kg
    double eta = 0.7;             // humidifier efficiency
    double p_cop = 2.5;           // heat pump coefficient of performance
    double c_elec = 0.30;         // electricity price, EUR/kWh
    double p_pump = 30.0;         // always-on pump power, W
    double smooth_l = 50.0;       // smoothing constant in |x|_L
    double s_h = 1e3;             // humidity-group scale
    double s_p = 1e-3;            // floor-power scale

    double m_air() const { return v_r * rho_air; }

    void validate() const {
        const double fields[] = {rho_air, c_p_air, v_r,     c_r,   r_rw,     p_occ,
                                 mdot_c_occ, mdot_h_occ, alpha_solar, a_solar, c_out,
                                 h_out,   p_sfp,   h_vap,   eta,   p_cop,    c_elec,
                                 p_pump,  smooth_l, s_h,    s_p};
        for (double f : fields)
            if (!(f > 0.0)) throw InvalidInput("RoomParams: all parameters must be positive");
        if (eta > 1.0) throw InvalidInput("RoomParams: efficiency above one");
    }
};

namespace detail {

// Shared right-hand side; scales (s_h, s_p) = (1, 1) reproduce the physical
// units, in which case d[3] must be the physical moisture disturbance.
inline Vec ode_core(const Vec& x, const Vec& u, const Vec& d, const RoomParams& p,
                    double s_h, double s_p) {
    const double t = x[0];
    const double h = x[1];
    const double n_occ = d[0], t_out = d[1], solar = d[2], m_dist = d[3];
    const double p_floor = u[0], mix = u[1], q = u[2], dt_cond = u[3], g = u[4];

    const double t_sup = mix * t + (1.0 - mix) * t_out + dt_cond;
    const double h_sup = mix * h + (1.0 - mix) * (p.h_out * s_h);

    Vec dx(x.size());
    dx[0] = ((t_out - t) / p.r_rw + p_floor / s_p + n_occ * p.p_occ +
             p.alpha_solar * p.a_solar * solar +
             p.rho_air * p.c_p_air * q * (t_sup - t)) /
            p.c_r;
    dx[1] = (p.rho_air * q * (h_sup - h + g) + n_occ * (p.mdot_h_occ * s_h) + m_dist) /
            p.m_air();
    if (x.size() == 3) {
        const double c = x[2];
        const double c_sup = mix * c + (1.0 - mix) * p.c_out;
        dx[2] = (q * (c_sup - c) + n_occ * p.mdot_c_occ) / p.m_air();
    }
    return dx;
}

}  // namespace detail

// Scaled three-state dynamics.
inline Vec room_ode(const Vec& x, const Vec& u, const Vec& d, const RoomParams& p) {
    if (x.size() != 3 || u.size() != 5 || d.size() != 4)
        throw InvalidInput("room_ode: expected sizes (3, 5, 4)");
    return detail::ode_core(x, u, d, p, p.s_h, p.s_p);
}

// Scaled reduced dynamics: the (T, h) pair, which never reads c.
inline Vec room_ode_reduced(const Vec& x, const Vec& u, const Vec& d, const RoomParams& p) {
    if (x.size() != 2 || u.size() != 5 || d.size() != 4)
        throw InvalidInput("room_ode_reduced: expected sizes (2, 5, 4)");
    return detail::ode_core(x, u, d, p, p.s_h, p.s_p);
}

// Physical-unit dynamics; d[3] in physical kg/s.
inline Vec room_ode_unscaled(const Vec& x, const Vec& u, const Vec& d, const RoomParams& p) {
    if (x.size() != 3 || u.size() != 5 || d.size() != 4)
        throw InvalidInput("room_ode_unscaled: expected sizes (3, 5, 4)");
    return detail::ode_core(x, u, d, p, 1.0, 1.0);
}

// Analytic Jacobians of the reduced right-hand side.
inline mpc::StepLinearization room_ode_reduced_jacobians(const Vec& x, const Vec& u,
                                                         const Vec& d, const RoomParams& p) {
    const double t = x[0];
    const double h = x[1];
    const double t_out = d[1];
    const double mix = u[1], q = u[2], g = u[4];
    const double h_out_s = p.h_out * p.s_h;
    const double t_sup = mix * t + (1.0 - mix) * t_out + u[3];
    const double h_sup = mix * h + (1.0 - mix) * h_out_s;
    const double rc = p.rho_air * p.c_p_air;

    mpc::StepLinearization lin;
    lin.a = Mat::Zero(2, 2);
    lin.a(0, 0) = (-1.0 / p.r_rw + rc * q * (mix - 1.0)) / p.c_r;
    lin.a(1, 1) = p.rho_air * q * (mix - 1.0) / p.m_air();

    lin.b = Mat::Zero(2, 5);
    lin.b(0, 0) = 1.0 / (p.s_p * p.c_r);
    lin.b(0, 1) = rc * q * (t - t_out) / p.c_r;
    lin.b(0, 2) = rc * (t_sup - t) / p.c_r;
    lin.b(0, 3) = rc * q / p.c_r;
    lin.b(1, 1) = p.rho_air * q * (h - h_out_s) / p.m_air();
    lin.b(1, 2) = p.rho_air * (h_sup - h + g) / p.m_air();
    lin.b(1, 4) = p.rho_air * q / p.m_air();
    return lin;
}

// ---------------------------------------------------------------------------
// Boxes (scaled units).

inline Vec state_lb(const RoomParams& p) {
    Vec v(3);
    v << 17.0, 4e-3 * p.s_h, 0.0;
    return v;
}
inline Vec state_ub(const RoomParams& p) {
    Vec v(3);
    v << 25.0, 15e-3 * p.s_h, 1000.0;
    return v;
}
inline Vec input_lb(const RoomParams& p) {
    Vec v(5);
    v << 0.0, 0.0, 0.0, -5.0, -(0.4 / 3600.0) * p.s_h;
    return v;
}
inline Vec input_ub(const RoomParams& p) {
    Vec v(5);
    v << 2000.0 * p.s_p, 1.0, 0.5, 5.0, (0.4 / 3600.0) * p.s_h;
    return v;
}
inline Vec oss_state_lb(const RoomParams&) {
    Vec v(3);
    v << 19.8, 5.5, 0.0;
    return v;
}
inline Vec oss_state_ub(const RoomParams&) {
    Vec v(3);
    v << 22.2, 8.5, 700.0;
    return v;
}
inline Vec oss_input_lb(const RoomParams& p) {
    Vec v = input_lb(p);
    v[2] += 0.05;  // minimum ventilation at the steady pair
    return v;
}
inline Vec oss_input_ub(const RoomParams& p) { return input_ub(p); }

// ---------------------------------------------------------------------------
// Power and money models.

inline double smooth_abs(double x, double l) { return std::sqrt(x * x + 1.0 / l); }

// EUR per hour for a scaled input vector.  Powers are formed in W from the
// physical quantities (the smoothing floor at zero is part of the model),
// then priced per kWh on a one-hour basis.
inline double money_rate(const Vec& u, const RoomParams& p) {
    if (u.size() != 5) throw InvalidInput("money_rate: expected a five-input vector");
    const double p_floor_w = u[0] / p.s_p;
    const double q = u[2];
    const double g_phys = u[4] / p.s_h;
    const double p_vent = p.p_sfp * q;
    const double p_cond = q * p.rho_air * p.c_p_air * smooth_abs(u[3], p.smooth_l);
    const double p_humid = smooth_abs(g_phys, p.smooth_l) * p.h_vap / p.eta;
    const double p_heat = p_floor_w / p.p_cop + p.p_pump;
    return p.c_elec * (p_vent + p_cond + p_humid + p_heat) / 1000.0;
}

// ---------------------------------------------------------------------------
// Discretized dynamics factories.

struct RoomDiscretization {
    double h_macro = 60.0;  // seconds per controller step
    int substeps = 1;
};

inline mpc::DiscreteDynamics make_full_dynamics(const RoomParams& p, const Vec& d,
                                                const RoomDiscretization& disc = {}) {
    p.validate();
    if (d.size() != 4) throw InvalidInput("make_full_dynamics: disturbance must have 4 entries");
    mpc::DiscreteDynamics dyn;
    dyn.n_w = 3;
    dyn.n_v = 5;
    dyn.disturbance = d;
    dyn.w_lb = state_lb(p);
    dyn.w_ub = state_ub(p);
    dyn.v_lb = input_lb(p);
    dyn.v_ub = input_ub(p);
    dyn.step = mpc::heun_discretize(
        [p, d](const Vec& x, const Vec& u) { return room_ode(x, u, d, p); },
        disc.h_macro / disc.substeps, disc.substeps);
    return dyn;
}

inline mpc::DiscreteDynamics make_reduced_dynamics(const RoomParams& p, const Vec& d,
                                                   const RoomDiscretization& disc = {}) {
    p.validate();
    if (d.size() != 4)
        throw InvalidInput("make_reduced_dynamics: disturbance must have 4 entries");
    mpc::DiscreteDynamics dyn;
    dyn.n_w = 2;
    dyn.n_v = 5;
    dyn.disturbance = d;
    dyn.w_lb = state_lb(p).head(2);
    dyn.w_ub = state_ub(p).head(2);
    dyn.v_lb = input_lb(p);
    dyn.v_ub = input_ub(p);
    const double h_micro = disc.h_macro / disc.substeps;
    dyn.step = mpc::heun_discretize(
        [p, d](const Vec& x, const Vec& u) { return room_ode_reduced(x, u, d, p); },
        h_micro, disc.substeps);
    dyn.jacobians = mpc::heun_discretize_jacobians(
        [p, d](const Vec& x, const Vec& u) { return room_ode_reduced(x, u, d, p); },
        [p, d](const Vec& x, const Vec& u) {
            return room_ode_reduced_jacobians(x, u, d, p);
        },
        h_micro, disc.substeps);
    return dyn;
}

// Stage weights of the benchmark: comfort objectives for temperature and
// humidity, an effort objective on the inputs.
inline mpc::StageCosts default_stage_costs(const Vec& w_ss, const Vec& v_ss) {
    if (w_ss.size() != 2 || v_ss.size() != 5)
        throw InvalidInput("default_stage_costs: expected reduced state and full input");
    mpc::StageCosts costs;
    Mat q1 = Mat::Zero(2, 2), q2 = Mat::Zero(2, 2);
    q1.diagonal() << 1.0, 1e-6;
    q2.diagonal() << 1e-6, 1.0;
    costs.q = {q1, q2, 1e-6 * Mat::Identity(2, 2)};
    costs.r = {1e-6 * Mat::Identity(5, 5), 1e-6 * Mat::Identity(5, 5), Mat::Identity(5, 5)};
    costs.w_ss = w_ss;
    costs.v_ss = v_ss;
    return costs;
}

// ---------------------------------------------------------------------------
// The eight benchmark cases: external conditions a/b crossed with four
// initial (T, h) states.

struct TestCase {
    char dist_id;
    int init_id;
    Vec d;   // (N_occ, T_out, S_solar, mdot_h_dist), moisture entry scaled
    Vec x0;  // reduced initial state, scaled
};

inline TestCase test_case(char dist_id, int init_id) {
    TestCase tc;
    tc.dist_id = dist_id;
    tc.init_id = init_id;
    tc.d = Vec(4);
    if (dist_id == 'a')
        tc.d << 2.0, 16.0, 200.0, 0.0;
    else if (dist_id == 'b')
        tc.d << 4.0, 28.0, 800.0, 0.5;
    else
        throw InvalidInput("test_case: disturbance id must be 'a' or 'b'");
    tc.x0 = Vec(2);
    switch (init_id) {
        case 1: tc.x0 << 24.0, 7.0; break;
        case 2: tc.x0 << 24.0, 4.5; break;
        case 3: tc.x0 << 17.0, 7.0; break;
        case 4: tc.x0 << 17.0, 4.5; break;
        default: throw InvalidInput("test_case: initial-state id must be 1..4");
    }
    return tc;
}

inline std::vector<TestCase> all_test_cases() {
    std::vector<TestCase> cases;
    for (char d : {'a', 'b'})
        for (int i = 1; i <= 4; ++i) cases.push_back(test_case(d, i));
    return cases;
}

}  // namespace mompc_lab::room
