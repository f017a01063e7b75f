#include "parkloc/pipeline.hpp"

#include <cmath>
#include <memory>
#include <sstream>

#include <gtest/gtest.h>

#include "parkloc/error.hpp"
#include "parkloc/fusion.hpp"
#include "parkloc/sim.hpp"
#include "test_support.hpp"

using namespace parkloc;

namespace {

// A single row of `n` spots along +x at y = 0, pitch 2.5 m.
std::shared_ptr<const HdMap> row_map(int n) {
    sim::LotSpec spec;
    spec.rows = 1;
    spec.spots_per_row = n;
    return std::make_shared<const HdMap>(sim::generate_lot(spec));
}

std::shared_ptr<const CameraRig> true_rig() {
    return std::make_shared<const CameraRig>(sim::make_rig(sim::default_mounts()));
}

// Exact detection of the marking at `anchor` seen by `cam` from `ego`.
DetectionRecord observe(const CameraRig& rig, Camera cam, const Point2Ground& ego, double heading,
                        const Point2Ground& anchor, std::string text, double score = 0.9) {
    const VehicleOffset off = anchor_offset(ego, heading, anchor);
    const Point2Image c = project(rig.ground_to_image(cam), {off.x, off.y});
    DetectionRecord r;
    r.camera = cam;
    r.box.corners = {{{c.u - 8, c.v - 4}, {c.u + 8, c.v - 4}, {c.u + 8, c.v + 4}, {c.u - 8, c.v + 4}}};
    r.content = std::move(text);
    r.score = score;
    return r;
}

const ParkingSpot& spot(const HdMap& map, const std::string& label) {
    return *find_exact(map, label);
}

PipelineConfig untimed() {
    PipelineConfig c;
    c.measure_latency = false;
    return c;
}

FrameBundle bundle(std::int64_t frame, double heading, std::vector<DetectionRecord> dets) {
    FrameBundle b;
    b.frame = frame;
    b.timestamp = static_cast<double>(frame) / 30.0;
    b.heading = heading;
    b.detections = std::move(dets);
    return b;
}

// Feeds one frame per value, each holding a single detection of that spot
// seen by the left camera from a vehicle 3 m in front of it.
void feed(Pipeline& p, const CameraRig& rig, const HdMap& map, std::int64_t& frame,
          const std::vector<int>& numbers) {
    for (const int n : numbers) {
        const auto& s = spot(map, sim::spot_label(n, static_cast<int>(map.size())));
        const Point2Ground ego{s.anchor.x, s.anchor.y - 3.0};
        p.process_frame(bundle(frame++, 0.0, {observe(rig, Camera::Left, ego, 0.0, s.anchor, s.label)}));
    }
}

std::vector<int> cyclic_90_98(int n = 30) {
    std::vector<int> v;
    for (int i = 0; i < n; ++i) v.push_back(90 + i % 9);
    return v;
}

}  // namespace

TEST(Pipeline, ZeroNoiseTwoSpotsGivesTruePose) {
    const auto map = row_map(10);
    const auto rig = true_rig();
    const Point2Ground ego{6.3, -3.1};
    const double heading = 0.07;
    Pipeline p(untimed(), map, rig);
    const auto& a = spot(*map, "003");
    const auto& b = spot(*map, "004");
    const auto out = p.process_frame(bundle(0, heading,
                                            {observe(*rig, Camera::Left, ego, heading, a.anchor, a.label),
                                             observe(*rig, Camera::Left, ego, heading, b.anchor, b.label),
                                             observe(*rig, Camera::Front, ego, heading, b.anchor, b.label)}));
    ASSERT_TRUE(out.pose);
    EXPECT_NEAR(out.pose->x, ego.x, 1e-9);
    EXPECT_NEAR(out.pose->y, ego.y, 1e-9);
    EXPECT_EQ(out.pose->heading, heading);
    EXPECT_EQ(out.pose->n_anchors, 2u);
    EXPECT_EQ(out.accepted.size(), 3u);
}

TEST(Pipeline, LabelAbsentFromMapIsRejectedByMap) {
    const auto map = row_map(10);
    const auto rig = true_rig();
    Pipeline p(untimed(), map, rig);
    auto det = observe(*rig, Camera::Left, {5, -3}, 0.0, {5, 0}, "999");
    const auto out = p.process_frame(bundle(0, 0.0, {det}));
    EXPECT_FALSE(out.pose);
    ASSERT_EQ(out.rejected_by_map.size(), 1u);
    EXPECT_EQ(out.rejected_by_map[0].text, "999");
    EXPECT_TRUE(out.accepted.empty());
    EXPECT_TRUE(p.filter_state().queue().empty());  // never reached the filter
}

TEST(Pipeline, NonParkingTextIsDiscarded) {
    const auto map = row_map(10);
    const auto rig = true_rig();
    Pipeline p(untimed(), map, rig);
    auto det = observe(*rig, Camera::Left, {5, -3}, 0.0, {5, 0}, "003");
    det.text_class = TextClass::PillarText;
    const auto out = p.process_frame(bundle(0, 0.0, {det}));
    EXPECT_FALSE(out.pose);
    EXPECT_EQ(out.discarded_class.size(), 1u);
}

TEST(Pipeline, FarAnomalyRejectedWithFilterAndPullsPoseWithout) {
    const auto map = row_map(600);
    const auto rig = true_rig();
    const auto& near = spot(*map, "095");
    const auto& far = spot(*map, "500");
    const Point2Ground ego{near.anchor.x - 4.0, -3.0};
    // The misread sits where 095 really is, so without filtering it is placed at 500.
    const auto frame = [&](std::int64_t f) {
        return bundle(f, 0.0, {observe(*rig, Camera::Left, ego, 0.0, near.anchor, "095"),
                               observe(*rig, Camera::Front, ego, 0.0, near.anchor, "500")});
    };

    Pipeline with(untimed(), map, rig);
    std::int64_t f = 0;
    feed(with, *rig, *map, f, cyclic_90_98());
    ASSERT_FALSE(with.filter_state().warm_up());
    const auto b = with.filter_state().bounds();
    ASSERT_FALSE(b.contains(500));
    const auto on = with.process_frame(frame(f));
    ASSERT_EQ(on.rejected_by_filter.size(), 1u);
    EXPECT_EQ(on.rejected_by_filter[0].text, "500");
    ASSERT_TRUE(on.pose);
    EXPECT_NEAR(on.pose->x, ego.x, 1e-9);

    PipelineConfig off_cfg = untimed();
    off_cfg.afm = false;
    Pipeline without(off_cfg, map, rig);
    const auto off = without.process_frame(frame(0));
    EXPECT_TRUE(off.rejected_by_filter.empty());
    ASSERT_TRUE(off.pose);
    EXPECT_NEAR(off.pose->x, ego.x + (far.anchor.x - near.anchor.x) / 2.0, 1e-9);
}

TEST(Pipeline, NumberlessLabelCountsAsFilterRejection) {
    const std::vector<ParkingSpot> spots = {{"EXIT", {0, 0}, 0}, {"001", {2.5, 0}, 0}};
    const auto map = std::make_shared<const HdMap>(HdMap::build("x", spots));
    const auto rig = true_rig();
    Pipeline p(untimed(), map, rig);
    const auto out = p.process_frame(
        bundle(0, 0.0, {observe(*rig, Camera::Left, {0, -3}, 0.0, {0, 0}, "EXIT")}));
    EXPECT_EQ(out.rejected_by_filter.size(), 1u);
    EXPECT_EQ(p.rejection_streak(), 0u);

    PipelineConfig off = untimed();
    off.afm = false;
    Pipeline q(off, map, rig);
    EXPECT_TRUE(q.process_frame(bundle(0, 0.0, {observe(*rig, Camera::Left, {0, -3}, 0.0, {0, 0}, "EXIT")}))
                    .pose);
}

TEST(Pipeline, ResetAfterNinetyConsecutiveRejections) {
    const auto map = row_map(600);
    const auto rig = true_rig();
    Pipeline p(untimed(), map, rig);
    std::int64_t f = 0;
    feed(p, *rig, *map, f, cyclic_90_98());

    feed(p, *rig, *map, f, std::vector<int>(89, 400));
    EXPECT_EQ(p.rejection_streak(), 89u);
    EXPECT_EQ(p.resets(), 0u);
    feed(p, *rig, *map, f, {94});  // an accept clears the streak
    EXPECT_EQ(p.rejection_streak(), 0u);

    feed(p, *rig, *map, f, std::vector<int>(89, 400));
    EXPECT_EQ(p.resets(), 0u);
    EXPECT_EQ(p.filter_state().queue().size(), 30u);
    feed(p, *rig, *map, f, {400});
    EXPECT_EQ(p.resets(), 1u);
    EXPECT_EQ(p.rejection_streak(), 0u);
    EXPECT_TRUE(p.filter_state().queue().empty());

    feed(p, *rig, *map, f, {401});  // warm-up again: accepted
    EXPECT_EQ(p.filter_state().queue().size(), 1u);
    EXPECT_EQ(p.filter_state().queue().back(), 401);
}

TEST(Pipeline, ResetCountsDetectionsNotFrames) {
    const auto map = row_map(600);
    const auto rig = true_rig();
    PipelineConfig cfg = untimed();
    cfg.reset_after_rejections = 5;
    Pipeline p(cfg, map, rig);
    std::int64_t f = 0;
    feed(p, *rig, *map, f, cyclic_90_98());
    const auto& s = spot(*map, "400");
    const Point2Ground ego{s.anchor.x, -3.0};
    std::vector<DetectionRecord> dets(5, observe(*rig, Camera::Left, ego, 0.0, s.anchor, "400"));
    p.process_frame(bundle(f++, 0.0, dets));
    EXPECT_EQ(p.resets(), 1u);
}

TEST(Pipeline, PerCameraFilterKeepsSeparateQueues) {
    const auto map = row_map(600);
    const auto rig = true_rig();
    PipelineConfig cfg = untimed();
    cfg.per_camera_filter = true;
    Pipeline p(cfg, map, rig);
    std::int64_t f = 0;
    feed(p, *rig, *map, f, cyclic_90_98());
    EXPECT_EQ(p.filter_state(Camera::Left).queue().size(), 30u);
    EXPECT_TRUE(p.filter_state(Camera::Front).queue().empty());

    const auto& s = spot(*map, "400");
    const Point2Ground ego{s.anchor.x - 4.0, -3.0};
    const auto out = p.process_frame(bundle(f, 0.0, {observe(*rig, Camera::Front, ego, 0.0, s.anchor, "400")}));
    EXPECT_EQ(out.accepted.size(), 1u);  // front queue is still warming up
}

TEST(Pipeline, CameraAveragingAndFirstCameraWins) {
    const auto map = row_map(10);
    const auto rig = true_rig();
    const auto& s = spot(*map, "004");
    const Point2Ground ego{s.anchor.x - 4.0, -3.0};
    auto front = observe(*rig, Camera::Front, ego, 0.0, s.anchor, s.label);
    auto left = observe(*rig, Camera::Left, {ego.x + 0.2, ego.y}, 0.0, s.anchor, s.label);  // 0.2 m off
    PipelineConfig cfg = untimed();
    cfg.afm = false;

    Pipeline avg(cfg, map, rig);
    const auto a = avg.process_frame(bundle(0, 0.0, {front, left}));
    ASSERT_TRUE(a.pose);
    EXPECT_NEAR(a.pose->x, ego.x + 0.1, 1e-9);

    cfg.mcrp = false;
    Pipeline first(cfg, map, rig);
    const auto b = first.process_frame(bundle(0, 0.0, {left, front}));
    ASSERT_TRUE(b.pose);
    EXPECT_NEAR(b.pose->x, ego.x + 0.2, 1e-9);
    EXPECT_EQ(b.accepted.size(), 2u);
}

TEST(Pipeline, WithoutAnchorFusionBestScoreAnchorWins) {
    const auto map = row_map(10);
    const auto rig = true_rig();
    const Point2Ground ego{7.0, -3.0};
    const auto& a = spot(*map, "003");
    const auto& b = spot(*map, "005");
    // 005 is observed as if the vehicle were 0.3 m further along.
    const auto da = observe(*rig, Camera::Left, ego, 0.0, a.anchor, a.label, 0.6);
    const auto db = observe(*rig, Camera::Left, {ego.x + 0.3, ego.y}, 0.0, b.anchor, b.label, 0.8);
    PipelineConfig cfg = untimed();
    cfg.afm = false;
    cfg.mcap = false;
    Pipeline p(cfg, map, rig);
    const auto out = p.process_frame(bundle(0, 0.0, {da, db}));
    ASSERT_TRUE(out.pose);
    EXPECT_NEAR(out.pose->x, ego.x + 0.3, 1e-9);
    EXPECT_EQ(out.pose->n_anchors, 1u);

    cfg.mcap = true;
    Pipeline q(cfg, map, rig);
    const auto fused = q.process_frame(bundle(0, 0.0, {da, db}));
    EXPECT_NEAR(fused.pose->x, ego.x + 0.15, 1e-9);
    EXPECT_EQ(fused.pose->n_anchors, 2u);
}

TEST(Pipeline, PointAtInfinityIsCountedNotFatal) {
    const auto map = row_map(10);
    const auto rig = true_rig();
    const auto& inv = rig->image_to_ground(Camera::Front).matrix();
    const double u = 640.0;
    const double v = -(inv(2, 0) * u + inv(2, 2)) / inv(2, 1);  // image horizon
    DetectionRecord d;
    d.camera = Camera::Front;
    d.box.corners = {{{u - 8, v - 4}, {u + 8, v - 4}, {u + 8, v + 4}, {u - 8, v + 4}}};
    d.content = "003";
    PipelineConfig cfg = untimed();
    cfg.afm = false;
    Pipeline p(cfg, map, rig);
    FrameOutcome out;
    ASSERT_NO_THROW(out = p.process_frame(bundle(0, 0.0, {d})));
    EXPECT_EQ(out.projection_failures.size(), 1u);
    EXPECT_FALSE(out.pose);
}

TEST(Pipeline, EmptyStreamGivesNoOutcomes) {
    Pipeline p(untimed(), row_map(3), true_rig());
    VectorSource src({});
    EXPECT_TRUE(run(p, src).empty());
}

TEST(Pipeline, NeedsMapAndRig) {
    EXPECT_THROW(Pipeline(untimed(), nullptr, true_rig()), Error);
    PipelineConfig bad = untimed();
    bad.filter_capacity = 1;
    EXPECT_THROW(Pipeline(bad, row_map(3), true_rig()), Error);
    EXPECT_THROW(Pipeline::from_config(untimed()), Error);
}

class NoisyRun : public ::testing::Test {
protected:
    static void SetUpTestSuite() {
        auto scenario = sim::standard_scenario(9);
        scenario.trajectory.duration_s = 15.0;
        sim_ = std::make_unique<sim::Simulation>(sim::simulate(scenario));
    }
    static void TearDownTestSuite() { sim_.reset(); }

    static std::vector<FrameOutcome> replay(const PipelineConfig& cfg) {
        auto map = std::shared_ptr<const HdMap>(&sim_->world.map(), [](const HdMap*) {});
        auto rig = std::shared_ptr<const CameraRig>(&sim_->rig, [](const CameraRig*) {});
        Pipeline p(cfg, map, rig);
        VectorSource src(sim_->run.bundles);
        return run(p, src);
    }

    static std::unique_ptr<sim::Simulation> sim_;
};

std::unique_ptr<sim::Simulation> NoisyRun::sim_;

TEST_F(NoisyRun, ReplayIsDeterministic) {
    const auto a = replay(untimed());
    const auto b = replay(untimed());
    EXPECT_EQ(a, b);
    std::ostringstream sa;
    std::ostringstream sb;
    write_outcomes(sa, a);
    write_outcomes(sb, b);
    EXPECT_EQ(sa.str(), sb.str());
}

TEST_F(NoisyRun, DisablingFilterNeverAcceptsFewer) {
    PipelineConfig off = untimed();
    off.afm = false;
    const auto with = replay(untimed());
    const auto without = replay(off);
    ASSERT_EQ(with.size(), without.size());
    for (std::size_t k = 0; k < with.size(); ++k) {
        EXPECT_GE(without[k].accepted.size(), with[k].accepted.size()) << "frame " << k;
    }
}

TEST_F(NoisyRun, PoseIffSomethingSurvived) {
    for (const auto& o : replay(untimed())) {
        EXPECT_EQ(o.pose.has_value(), !o.accepted.empty()) << "frame " << o.frame;
        const std::size_t total = o.accepted.size() + o.rejected_by_filter.size() + o.rejected_by_map.size() +
                                  o.discarded_class.size() + o.projection_failures.size();
        EXPECT_EQ(total, sim_->run.bundles[static_cast<std::size_t>(o.frame)].detections.size());
    }
}

TEST_F(NoisyRun, OutcomeLogRoundTrip) {
    PipelineConfig cfg;
    const auto outcomes = replay(cfg);
    std::ostringstream out;
    write_outcomes(out, outcomes);
    std::istringstream in(out.str());
    std::string line;
    std::size_t n = 0;
    while (std::getline(in, line)) {
        const FrameOutcome back = parse_outcome(line, n + 1);
        EXPECT_EQ(format_outcome(back), line);
        EXPECT_EQ(back.accepted, outcomes[n].accepted);
        EXPECT_EQ(back.pose.has_value(), outcomes[n].pose.has_value());
        if (back.pose) EXPECT_EQ(back.pose->x, outcomes[n].pose->x);
        ++n;
    }
    EXPECT_EQ(n, outcomes.size());
    EXPECT_THROW(parse_outcome("{\"frame\": 1}", 3), Error);
}
