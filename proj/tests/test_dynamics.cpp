#include <catch2/catch.hpp>

#include "qoc/fidelity.hpp"
#include "qoc/propagate.hpp"
#include "qoc/schemes.hpp"

#include "support/test_util.hpp"

using namespace qoc;

TEST_CASE("segment exponential basics", "[dynamics]") {
    SECTION("zero Hamiltonian gives the identity") {
        const Matrix u = step_exponential(Matrix::Zero(4, 4), 0.7);
        CHECK(deviation_from_identity(u) < 1e-15);
    }
    SECTION("zero step gives the identity") {
        const Matrix u = step_exponential(qoc_test::random_hermitian(6, 1.0, 11), 0.0);
        CHECK(deviation_from_identity(u) < 1e-15);
    }
    SECTION("half Rabi period flips the two-level system") {
        const double ej = 0.08;
        Matrix h(2, 2);
        h << 0.0, -ej / 2, -ej / 2, 0.0;
        const Matrix u = step_exponential(h, pi / ej);
        // exp(+i (pi/2) sigma_x) = i sigma_x: flip up to global phase
        CHECK(std::abs(u(0, 1)) == Approx(1.0).margin(1e-12));
        CHECK(std::abs(u(1, 0)) == Approx(1.0).margin(1e-12));
        CHECK(std::abs(u(0, 0)) < 1e-12);
    }
    SECTION("unitary to roundoff for random Hermitian generators") {
        for (int trial = 0; trial < 20; ++trial) {
            const Matrix h = qoc_test::random_hermitian(8, 2.0, 100 + trial);
            CHECK(unitarity_defect(step_exponential(h, 0.3)) < 1e-12);
        }
    }
}

namespace {

TwoQubitSystem make_test_system(const ChargeBasis& basis) {
    QubitParams q1{1.0, 0.0777, 0.45}, q2{1.2738, 0.0610, 0.52};
    CouplingSpec c{CouplingKind::Josephson, 0.1653, 0.04};
    return TwoQubitSystem(basis, q1, q2, c);
}

} // namespace

TEST_CASE("propagation of constant pulses is exact and composable", "[dynamics]") {
    const TwoQubitSystem system = make_test_system(default_basis());

    SECTION("1 step vs 100 steps agree for a time-independent Hamiltonian") {
        const PulseSet p1 = constant_pulse_set(TimeGrid{12.0, 2}, {{ControlId::EJJ, 0.05}});
        const PulseSet p100 = constant_pulse_set(TimeGrid{12.0, 100}, {{ControlId::EJJ, 0.05}});
        const Matrix u1 = propagate(system, p1).unitary;
        const Matrix u100 = propagate(system, p100).unitary;
        CHECK(max_abs(u1 - u100) < 1e-12);
    }

    SECTION("evolution over [0,tau] composes from the two halves") {
        TimeGrid grid{8.0, 64};
        PulseSet pulses;
        pulses.grid = grid;
        RealVector ramp(64);
        for (int k = 0; k < 64; ++k) ramp(k) = 0.05 + 0.02 * std::sin(2 * pi * k / 64.0);
        pulses.fields.emplace_back(ControlId::EJJ, ramp);

        PulseSet first, second;
        first.grid = TimeGrid{4.0, 32};
        second.grid = TimeGrid{4.0, 32};
        first.fields.emplace_back(ControlId::EJJ, RealVector(ramp.head(32)));
        second.fields.emplace_back(ControlId::EJJ, RealVector(ramp.tail(32)));

        const Matrix whole = propagate(system, pulses).unitary;
        const Matrix composed =
            propagate(system, second).unitary * propagate(system, first).unitary;
        CHECK(max_abs(whole - composed) < 1e-12);
    }

    SECTION("retained segment unitaries compose to the total") {
        PulseSet pulses = constant_pulse_set(TimeGrid{6.0, 12}, {{ControlId::EJJ, 0.05}});
        RealVector& s = pulses.samples(ControlId::EJJ);
        for (int k = 0; k < 12; ++k) s(k) = 0.03 + 0.01 * (k % 3);
        const Propagator p = propagate(system, pulses, PropagateOptions{true});
        REQUIRE(p.segments.size() == 12);
        Matrix u = Matrix::Identity(system.dim(), system.dim());
        for (const auto& seg : p.segments) u = seg.unitary * u;
        CHECK(max_abs(u - p.unitary) < 1e-13);
    }

    SECTION("NaN samples are rejected") {
        PulseSet bad = constant_pulse_set(TimeGrid{1.0, 4}, {{ControlId::NG1, 0.5}});
        bad.samples(ControlId::NG1)(2) = std::numeric_limits<double>::quiet_NaN();
        CHECK_THROWS_AS(propagate(system, bad), input_error);
    }

    SECTION("negative Josephson magnitudes are rejected") {
        PulseSet bad = constant_pulse_set(TimeGrid{1.0, 4}, {{ControlId::EJ1, -0.05}});
        CHECK_THROWS_AS(propagate(system, bad), input_error);
    }
}

TEST_CASE("propagator unitarity across windows and random pulses", "[dynamics][property]") {
    Rng rng(42);
    for (const ChargeBasis& basis : {two_level_basis(), default_basis(), extended_basis()}) {
        for (int trial = 0; trial < 5; ++trial) {
            QubitParams q1{rng.uniform(0.5, 1.5), rng.uniform(0.0, 0.15), rng.uniform(0.0, 1.0)};
            QubitParams q2{rng.uniform(0.5, 1.5), rng.uniform(0.0, 0.15), rng.uniform(0.0, 1.0)};
            CouplingSpec c{CouplingKind::Josephson, rng.uniform(0.0, 0.2), rng.uniform(0.0, 0.1)};
            const TwoQubitSystem system(basis, q1, q2, c);
            TimeGrid grid{rng.uniform(5.0, 30.0), 50};
            PulseSet pulses;
            pulses.grid = grid;
            RealVector ej(grid.n_steps), ng(grid.n_steps);
            for (int k = 0; k < grid.n_steps; ++k) {
                ej(k) = rng.uniform(0.0, 0.15);
                ng(k) = rng.uniform(0.0, 1.0);
            }
            pulses.fields.emplace_back(ControlId::EJJ, ej);
            pulses.fields.emplace_back(ControlId::NG1, ng);
            CHECK(unitarity_defect(propagate(system, pulses).unitary) < 1e-10);
        }
    }
}

TEST_CASE("halving the segments leaves the error unchanged", "[dynamics]") {
    // Each segment is propagated by its exact exponential, so refining the
    // grid (same piecewise-constant pulse, doubled sampling) cannot move the
    // result beyond roundoff.
    const TwoQubitSystem system = make_test_system(default_basis());
    const GateTarget target = make_gate_target(GateKind::CC, default_basis());
    TimeGrid grid{cc_gate_time(0.0777), 500};
    PulseSet pulses;
    pulses.grid = grid;
    RealVector ng1(grid.n_steps), ng2(grid.n_steps);
    for (int k = 0; k < grid.n_steps; ++k) {
        const double t = grid.t_start(k);
        ng1(k) = 0.45 + 0.05 * std::sin(2 * pi * t / grid.tau);
        ng2(k) = 0.52 + 0.03 * std::sin(4 * pi * t / grid.tau);
    }
    pulses.fields.emplace_back(ControlId::NG1, ng1);
    pulses.fields.emplace_back(ControlId::NG2, ng2);

    const double eps_coarse = gate_error(propagate(system, pulses).unitary, target).epsilon;
    const double eps_fine =
        gate_error(propagate(system, pulses.refined(2)).unitary, target).epsilon;
    CHECK(std::abs(eps_coarse - eps_fine) < 1e-6);
    CHECK(std::abs(eps_coarse - eps_fine) < 1e-12);
}

TEST_CASE("computational projection", "[dynamics]") {
    const ChargeBasis basis = default_basis();
    const GateTarget target = make_gate_target(GateKind::CC, basis);
    const int dim = basis.dim() * basis.dim();

    SECTION("identity projects to the 4x4 identity") {
        const Eigen::Matrix4cd u_tilde =
            project_computational(Matrix::Identity(dim, dim), target);
        CHECK(deviation_from_identity(Matrix(u_tilde)) < 1e-14);
    }

    SECTION("an embedded block unitary projects to its block") {
        // U = B G B^dag + (I - B B^dag): acts as G inside, identity outside.
        const Matrix b = target.embedding;
        const Matrix u = b * target.matrix * b.adjoint() +
                         (Matrix::Identity(dim, dim) - b * b.adjoint());
        CHECK(unitarity_defect(u) < 1e-12);
        const Eigen::Matrix4cd u_tilde = project_computational(u, target);
        CHECK(max_abs(Matrix(u_tilde - target.matrix)) < 1e-13);
        CHECK(gate_error(u, target).epsilon == Approx(0.0).margin(1e-14));
        CHECK(gate_error(u, target).leakage_max == Approx(0.0).margin(1e-14));
    }

    SECTION("singular values of the projection never exceed one") {
        for (int trial = 0; trial < 20; ++trial) {
            const Matrix u = qoc_test::random_unitary(dim, 500 + trial);
            const Eigen::Matrix4cd u_tilde = project_computational(u, target);
            Eigen::JacobiSVD<Eigen::Matrix4cd> svd(u_tilde);
            CHECK(svd.singularValues().maxCoeff() <= 1.0 + 1e-12);
        }
    }
}

TEST_CASE("gate error conventions", "[dynamics]") {
    const ChargeBasis basis = default_basis();
    const GateTarget target = make_gate_target(GateKind::CC, basis);

    SECTION("perfect gate has zero error") {
        CHECK(gate_error(Eigen::Matrix4cd(target.matrix), target).epsilon ==
              Approx(0.0).margin(1e-15));
    }

    SECTION("identity against the conditional flip: trace 2, error 1/2") {
        const Eigen::Matrix4cd eye = Eigen::Matrix4cd::Identity();
        CHECK((target.matrix.adjoint() * eye).trace().real() == Approx(2.0));
        CHECK(gate_error(eye, target).epsilon == Approx(0.5));
    }

    SECTION("a global phase does not change the error") {
        Rng rng(7);
        for (int trial = 0; trial < 10; ++trial) {
            const double phi = rng.uniform(0.0, 2 * pi);
            const Eigen::Matrix4cd rotated = std::exp(Complex(0, phi)) * target.matrix;
            CHECK(gate_error(rotated, target).epsilon == Approx(0.0).margin(1e-14));
        }
    }

    SECTION("the phase-sensitive variant keeps the phase") {
        const Eigen::Matrix4cd rotated = std::exp(Complex(0, 0.3)) * target.matrix;
        CHECK(gate_error(rotated, target, ErrorConvention::RealPart).epsilon ==
              Approx(1.0 - std::cos(0.3)).margin(1e-12));
    }

    SECTION("error is Lipschitz in the projected evolution") {
        Rng rng(99);
        for (int trial = 0; trial < 10; ++trial) {
            const Matrix a4 = qoc_test::random_unitary(4, 900 + trial);
            const Matrix b4 = qoc_test::random_unitary(4, 1900 + trial);
            const Eigen::Matrix4cd ua = a4, ub = b4;
            const double ea = gate_error(ua, target).epsilon;
            const double eb = gate_error(ub, target).epsilon;
            // |Tr(G^dag (A-B))| <= ||A-B||_tr
            Eigen::JacobiSVD<Eigen::Matrix4cd> svd(ua - ub);
            const double trace_norm = svd.singularValues().sum();
            CHECK(std::abs(ea - eb) <= trace_norm / 4.0 + 1e-12);
        }
    }
}

TEST_CASE("no leakage exists in the two-level window", "[dynamics]") {
    const ChargeBasis basis = two_level_basis();
    const GateTarget target = make_gate_target(GateKind::CC, basis);
    for (int trial = 0; trial < 10; ++trial) {
        const Matrix u = qoc_test::random_unitary(4, 3000 + trial);
        CHECK(gate_error(u, target).leakage_max < 1e-12);
    }
}

TEST_CASE("leakage is reported from the full propagator", "[dynamics]") {
    const ChargeBasis basis = default_basis();
    const TwoQubitSystem system = make_test_system(basis);
    const GateTarget target = make_gate_target(GateKind::CC, basis);
    const PulseSet pulses = constant_pulse_set(TimeGrid{10.0, 16}, {{ControlId::EJJ, 0.0}});
    const GateError err = gate_error(propagate(system, pulses).unitary, target);
    CHECK(err.leakage_max > 0.0);
    CHECK(err.leakage_max < 0.05);
}
