#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>

#include "fewscale/dataset.hpp"
#include "fewscale/errors.hpp"
#include "fewscale/types.hpp"
#include "test_support.hpp"

using namespace fewscale;

TEST_CASE("dataset rejects invalid contents") {
    SUBCASE("zero dim") { CHECK_THROWS_AS(EmbeddingDataset(0, {}, {}), ValidationError); }
    SUBCASE("component count mismatch") {
        CHECK_THROWS_AS(EmbeddingDataset(2, {{1, 0}}, {1.0f}), ValidationError);
    }
    SUBCASE("duplicate sample id") {
        CHECK_THROWS_AS(EmbeddingDataset(1, {{1, 0}, {1, 2}}, {1.0f, 2.0f}), ValidationError);
    }
    SUBCASE("non-finite component") {
        const float nan = std::numeric_limits<float>::quiet_NaN();
        CHECK_THROWS_WITH_AS(EmbeddingDataset(1, {{1, 0}, {2, 0}}, {1.0f, nan}),
                             doctest::Contains("record 1"), ValidationError);
    }
}

TEST_CASE("class ids are sorted and distinct") {
    auto d = DatasetBuilder(1).add(1, 7, {0.f}).add(2, 3, {0.f}).add(3, 7, {0.f}).build();
    CHECK(d.class_ids() == std::vector<ClassId>{3, 7});
}

TEST_CASE("view groups records by class and restricts") {
    auto d = testing::share(testing::random_dataset(4, 3, 2, 1));
    DatasetView v(d);
    CHECK(v.class_count() == 4);
    CHECK(v.record_count() == 12);
    const auto r = v.restrict_to({1, 7, 99});
    CHECK(r.class_set() == std::set<ClassId>{1, 7});
    CHECK(r.record_count() == 6);
    const auto m = r.materialize();
    CHECK(m.size() == 6);
    CHECK(m.dim() == 2);
}

TEST_CASE("scaling curve sorts points and rejects duplicates") {
    ScalingCurve c(ScaleVariable::DatasetSize, {{100, 40}, {10, 50}, {1000, 30}});
    CHECK(c.points().front().value == 10);
    CHECK(c.points().back().value == 1000);
    CHECK_THROWS_AS(ScalingCurve(ScaleVariable::DatasetSize, {{10, 40}, {10, 50}}), ValidationError);
    CHECK_THROWS_AS(ScalingCurve(ScaleVariable::DatasetSize, {{0, 40}}), ValidationError);
    CHECK_THROWS_AS(ScalingCurve(ScaleVariable::DatasetSize, {{1, 140}}), ValidationError);
}

TEST_CASE("method names round trip") {
    for (Method m : kAllMethods) CHECK(parse_method(to_string(m)) == m);
    CHECK_THROWS_AS(parse_method("knn"), ArgumentError);
}
