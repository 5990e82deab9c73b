"""gesturesynth: synthetic egocentric hand-gesture videos with exact labels.

Masks are extracted from real frames (skin thresholding plus min-cut
refinement), animated along parameterized gesture trajectories, and rendered
through either unpaired domain translation or mask-conditioned scene
composition. Every frame carries its hand bounding box and fingertip.
"""

from .color import hsv_to_rgb, rgb_to_hsv
from .composer import (ComposerCheckpoint, SceneComposer, composite,
                       fingertip_channel, generate_background,
                       generate_foreground, train_composer)
from .cyclegan import (CycleCheckpoint, CycleTranslator, train_cyclegan,
                       translate)
from .datasets import (DatasetIndex, FrameRecord, load_dataset, save_dataset,
                       split_by_environment)
from .extraction import HandMaskExtractor, HsvRange, extract_hand_mask, skin_threshold
from .gestures import (GestureSpec, GestureSynthesizer, MaskSequence, Pose2D,
                       make_trajectory, pose_to_affine, synthesize_mask_sequence,
                       transform_point, warp_mask)
from .grabcut import refine_foreground, seed_trimap
from .losses import adversarial_loss, cycle_loss
from .morphology import (bounding_box, erode, locate_fingertip,
                         remove_small_blobs)
from .networks import (DiscriminatorConfig, GeneratorConfig, build_generator,
                       build_patch_discriminator)
from .schedules import ComposerSchedule, TrainSchedule, learning_rate
from .types import BoundingBox, HandMask, LayoutMap
from .video import (JitterReport, LabeledFrame, LabeledVideo, assemble_video,
                    background_jitter, export_video, import_video,
                    translate_video)

__version__ = "0.1.0"

__all__ = [
    "BoundingBox", "ComposerCheckpoint", "ComposerSchedule", "CycleCheckpoint",
    "CycleTranslator", "DatasetIndex", "DiscriminatorConfig", "FrameRecord",
    "GeneratorConfig", "GestureSpec", "GestureSynthesizer", "HandMask",
    "HandMaskExtractor", "HsvRange", "JitterReport", "LabeledFrame",
    "LabeledVideo", "LayoutMap", "MaskSequence", "Pose2D", "SceneComposer",
    "TrainSchedule", "adversarial_loss", "assemble_video", "background_jitter",
    "bounding_box", "build_generator", "build_patch_discriminator", "composite",
    "cycle_loss", "erode", "export_video", "extract_hand_mask",
    "fingertip_channel", "generate_background", "generate_foreground",
    "hsv_to_rgb", "import_video", "learning_rate", "load_dataset",
    "locate_fingertip", "make_trajectory", "pose_to_affine", "refine_foreground",
    "remove_small_blobs", "rgb_to_hsv", "save_dataset", "seed_trimap",
    "skin_threshold", "split_by_environment", "synthesize_mask_sequence",
    "train_composer", "train_cyclegan", "transform_point", "translate",
    "translate_video", "warp_mask",
]
