/// Model wiring: initialization determinism, architecture bookkeeping,
/// spatial-derivative fidelity, tape-vs-template equivalence, checkpoints.

#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include "doctest.h"
#include "qpinn/network.hpp"
#include "support/fd.hpp"
#include "support/tmpdir.hpp"

using namespace qpinn;
using qpinn::test::fd_first;
using qpinn::test::fd_second;
using qpinn::test::mixed_err;
using qpinn::test::TmpDir;

TEST_SUITE_BEGIN("network");

TEST_CASE("architecture shapes and parameter counts") {
    const Architecture c = Architecture::classical();
    CHECK(c.layer_widths ==
          std::vector<int>{3, 64, 64, 64, 64, 64, 16, 4});
    CHECK(c.total_params() == 18004);  // 256 + 4*4160 + 1040 + 68

    const Architecture h = Architecture::hybrid();
    CHECK(h.layer_widths == std::vector<int>{3, 64, 64, 64, 64, 64, 16});
    CHECK(h.circuit.param_count() == 16);
    CHECK(h.circuit.feature_count() == 16);
    CHECK(h.total_params() == 17972);  // trunk 17936 + 16 angles + 20 head
}

TEST_CASE("init is deterministic in the seed") {
    const ModelParams a = init_params(7, Variant::Classical);
    const ModelParams b = init_params(7, Variant::Classical);
    const ModelParams c = init_params(8, Variant::Classical);
    CHECK(a.flat == b.flat);
    CHECK(a.flat != c.flat);

    const ModelParams h = init_params(7, Variant::Hybrid);
    CHECK(h.flat.size() == h.arch.total_params());
    for (int j = 0; j < 16; ++j) {
        const double ang = h.circuit_params()[j];
        CHECK(std::abs(ang) <= 0.1);  // near-identity start
    }
    for (double w : h.flat) CHECK(std::isfinite(w));
}

TEST_CASE("zero-weight classical network maps everything to zero") {
    ModelParams mp = init_params(1, Variant::Classical);
    std::fill(mp.flat.begin(), mp.flat.end(), 0.0);
    const auto seeded = seed_spatial({0.4, -1.0, 2.2});
    const auto pred = forward_fields<Dual>(mp, seeded);
    for (int i = 0; i < 3; ++i) {
        CHECK(pred.velocity[i].value() == 0.0);
        for (int j = 0; j < 3; ++j) {
            CHECK(pred.velocity[i].grad(j) == 0.0);
            CHECK(pred.velocity[i].hess(j) == 0.0);
        }
    }
    CHECK(pred.pressure.value() == 0.0);
}

TEST_CASE("classical outputs 4 fields; hybrid trunk emits 16 features") {
    const ModelParams c = init_params(2, Variant::Classical);
    const auto pc = forward_fields<double>(c, {0.1, 0.2, 0.3});
    CHECK(std::isfinite(pc.pressure));

    const ModelParams h = init_params(2, Variant::Hybrid);
    const auto feats = forward_trunk<double>(h, {0.1, 0.2, 0.3});
    CHECK(feats.size() == 16);
    const auto ph = forward_fields<double>(h, {0.1, 0.2, 0.3});
    CHECK(std::isfinite(ph.pressure));
    CHECK_THROWS_AS(forward_trunk<double>(c, {0.1, 0.2, 0.3}),
                    std::invalid_argument);
}

TEST_CASE("forward pass is pure") {
    const ModelParams mp = init_params(3, Variant::Hybrid);
    const auto a = forward_fields<double>(mp, {0.5, -0.25, 0.75});
    const auto b = forward_fields<double>(mp, {0.5, -0.25, 0.75});
    for (int i = 0; i < 3; ++i) CHECK(a.velocity[i] == b.velocity[i]);
    CHECK(a.pressure == b.pressure);
}

TEST_CASE("spatial derivatives match finite differences for both variants") {
    for (const Variant variant : {Variant::Classical, Variant::Hybrid}) {
        CAPTURE(to_string(variant));
        const ModelParams mp = init_params(11, variant);
        const std::array<double, 3> pt = {0.21, -0.43, 0.64};
        const auto seeded = seed_spatial(pt);
        const auto pred = forward_fields<Dual>(mp, seeded);
        const Dual outs[4] = {pred.velocity[0], pred.velocity[1],
                              pred.velocity[2], pred.pressure};
        for (int o = 0; o < 4; ++o) {
            for (int axis = 0; axis < 3; ++axis) {
                const auto f = [&](double t) {
                    std::array<double, 3> q = pt;
                    q[axis] = t;
                    const auto p = forward_fields<double>(mp, q);
                    return o < 3 ? p.velocity[o] : p.pressure;
                };
                CHECK(mixed_err(outs[o].grad(axis),
                                fd_first(f, pt[axis], 1e-5), 1e-7) < 1e-5);
                CHECK(mixed_err(outs[o].hess(axis),
                                fd_second(f, pt[axis], 1e-3), 1e-4) < 1e-3);
            }
        }
    }
}

TEST_CASE("tape forward equals templated forward, both modes, both variants") {
    for (const Variant variant : {Variant::Classical, Variant::Hybrid}) {
        CAPTURE(to_string(variant));
        const ModelParams mp = init_params(5, variant);
        const std::array<double, 3> pt = {-0.3, 0.8, 0.15};

        Tape tape;
        tape.bind_params(mp.flat);
        const auto out = tape_forward(tape, mp, pt, /*spatial=*/true);
        const auto seeded = seed_spatial(pt);
        const auto ref = forward_fields<Dual>(mp, seeded);
        const Dual refs[4] = {ref.velocity[0], ref.velocity[1],
                              ref.velocity[2], ref.pressure};
        for (int i = 0; i < 4; ++i)
            for (int l = 0; l < 7; ++l)
                CHECK(mixed_err(tape.value(out[i]).d[l], refs[i].d[l], 1e-13) <
                      1e-11);

        tape.reset();
        const auto vout = tape_forward(tape, mp, pt, /*spatial=*/false);
        for (int i = 0; i < 4; ++i)
            CHECK(mixed_err(tape.value(vout[i]).value(), refs[i].value(),
                            1e-13) < 1e-11);
    }
}

TEST_CASE("parameter size mismatch is rejected") {
    ModelParams mp = init_params(1, Variant::Classical);
    mp.flat.pop_back();
    CHECK_THROWS_AS(forward_fields<double>(mp, {0, 0, 0}),
                    std::invalid_argument);
    Tape tape;
    tape.bind_params(mp.flat);
    CHECK_THROWS_AS(tape_forward(tape, mp, {0, 0, 0}, false),
                    std::invalid_argument);
}

TEST_CASE("checkpoint round trip is bit-exact") {
    TmpDir tmp("ckpt");
    for (const Variant variant : {Variant::Classical, Variant::Hybrid}) {
        CAPTURE(to_string(variant));
        const ModelParams mp = init_params(1234, variant);
        const std::string path = tmp.file(std::string("model_") +
                                          to_string(variant));
        save_checkpoint(mp, path);
        const ModelParams back = load_checkpoint(path);
        CHECK(back.arch == mp.arch);
        REQUIRE(back.flat.size() == mp.flat.size());
        for (std::size_t i = 0; i < mp.flat.size(); ++i)
            CHECK(back.flat[i] == mp.flat[i]);
    }
}

TEST_CASE("checkpoint loader rejects malformed files") {
    TmpDir tmp("badckpt");
    CHECK_THROWS(load_checkpoint(tmp.file("missing")));

    {
        std::ofstream out(tmp.file("bad_header"));
        out << "not-a-checkpoint 1\n";
    }
    CHECK_THROWS(load_checkpoint(tmp.file("bad_header")));

    const ModelParams mp = init_params(1, Variant::Classical);
    save_checkpoint(mp, tmp.file("trunc"));
    {
        // drop the tail of the parameter list
        std::ifstream in(tmp.file("trunc"));
        std::stringstream buf;
        buf << in.rdbuf();
        std::string text = buf.str();
        text.resize(text.size() * 2 / 3);
        std::ofstream out(tmp.file("trunc"));
        out << text;
    }
    CHECK_THROWS(load_checkpoint(tmp.file("trunc")));
}

TEST_CASE("hybrid_from_classical copies the trunk and rejects misuse") {
    const ModelParams classical = init_params(21, Variant::Classical);
    const ModelParams hybrid = hybrid_from_classical(classical, 99);
    CHECK(hybrid.arch.variant == Variant::Hybrid);
    for (int l = 0; l < hybrid.arch.n_layers(); ++l) {
        const auto src = classical.layer_weights(l);
        const auto dst = hybrid.layer_weights(l);
        REQUIRE(src.size() == dst.size());
        for (std::size_t i = 0; i < src.size(); ++i) CHECK(src[i] == dst[i]);
    }
    CHECK_THROWS_AS(hybrid_from_classical(hybrid, 1), std::invalid_argument);
}

TEST_SUITE_END();
