#pragma once

#include <vector>

#include "avatar/handles/anchors.hpp"
#include "avatar/handles/joints.hpp"

namespace avatar {

/// What a predictor sees at a stage: the current mesh, its camera and the
/// input photograph (may be empty for oracle predictors).
struct StageInput {
    const TriMesh& mesh;
    const WeakPerspectiveCamera& camera;
    const RgbImage& image;
};

class JointPredictor {
public:
    virtual ~JointPredictor() = default;
    virtual JointMotion predict(const StageInput& input, const JointHandleSet& handles) = 0;
};

class AnchorPredictor {
public:
    virtual ~AnchorPredictor() = default;
    virtual AnchorMotion predict(const StageInput& input, const std::vector<int>& anchors) = 0;
};

// Motion toward ground-truth 2D joints.
class OracleJointPredictor : public JointPredictor {
public:
    explicit OracleJointPredictor(JointAnnotations gt) : gt_(std::move(gt)) {}
    JointMotion predict(const StageInput& input, const JointHandleSet& handles) override {
        return oracle_joint_motion(input.mesh, handles, input.camera, gt_);
    }

private:
    JointAnnotations gt_;
};

// Motion toward a ground-truth silhouette.
class OracleAnchorPredictor : public AnchorPredictor {
public:
    OracleAnchorPredictor(BinaryMask gt, AnchorMotionOptions options) : gt_(std::move(gt)), options_(options) {}
    AnchorMotion predict(const StageInput& input, const std::vector<int>& anchors) override {
        return oracle_anchor_motion(input.mesh, anchors, input.camera, gt_, options_);
    }

private:
    BinaryMask gt_;
    AnchorMotionOptions options_;
};

}  // namespace avatar
