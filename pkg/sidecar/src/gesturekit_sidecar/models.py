"""The three 3D CNN architectures the sidecar can serve.

ResNet-10 is the lightweight binary detector (16 base filters, one
basic block per stage, under a million parameters). C3D and ResNeXt-101
are the multi-class classifiers; C3D's fully connected head grows with
the clip depth, ResNeXt pools globally so its size does not.

PUBLISHED_PARAM_COUNTS holds the parameter counts reported for the
trained variants; serving checks the constructed model against them.
The ResNeXt-101 figure is not reachable from its published layer
layout (the faithful network has ~47.5M parameters) and is kept here
as reported.
"""

from __future__ import annotations

import math

import torch
import torch.nn as nn

ARCHITECTURES = ("resnet10", "c3d", "resnext101")

# (architecture, clip_depth) -> reported parameter count.
PUBLISHED_PARAM_COUNTS = {
    ("resnet10", 8): 0.90e6,
    ("c3d", 16): 78.11e6,
    ("c3d", 32): 111.67e6,
    ("resnext101", 16): 70.49e6,
    ("resnext101", 32): 70.49e6,
}

# Trained variants: architecture -> (allowed depths, num_classes).
TRAINED_VARIANTS = {
    "resnet10": ((8,), 2),
    "c3d": ((16, 32), 27),
    "resnext101": ((16, 32), 27),
}


class BasicBlock3d(nn.Module):
    """Two 3x3x3 convolutions with a shortcut connection."""

    def __init__(self, inplanes: int, planes: int, stride: int = 1):
        super().__init__()
        self.conv1 = nn.Conv3d(inplanes, planes, 3, stride=stride, padding=1, bias=False)
        self.bn1 = nn.BatchNorm3d(planes)
        self.conv2 = nn.Conv3d(planes, planes, 3, padding=1, bias=False)
        self.bn2 = nn.BatchNorm3d(planes)
        self.relu = nn.ReLU(inplace=True)
        self.downsample = None
        if stride != 1 or inplanes != planes:
            self.downsample = nn.Sequential(
                nn.Conv3d(inplanes, planes, 1, stride=stride, bias=False),
                nn.BatchNorm3d(planes),
            )

    def forward(self, x):
        identity = x if self.downsample is None else self.downsample(x)
        out = self.relu(self.bn1(self.conv1(x)))
        out = self.bn2(self.conv2(out))
        return self.relu(out + identity)


class ResNet10(nn.Module):
    """Slim 3D ResNet: 16/32/64/128 filters, one basic block per stage."""

    def __init__(self, num_classes: int = 2):
        super().__init__()
        self.conv1 = nn.Conv3d(3, 16, (3, 7, 7), stride=(1, 2, 2), padding=(1, 3, 3), bias=False)
        self.bn1 = nn.BatchNorm3d(16)
        self.relu = nn.ReLU(inplace=True)
        self.maxpool = nn.MaxPool3d(3, stride=2, padding=1)
        self.layer1 = BasicBlock3d(16, 16, stride=1)
        self.layer2 = BasicBlock3d(16, 32, stride=2)
        self.layer3 = BasicBlock3d(32, 64, stride=2)
        self.layer4 = BasicBlock3d(64, 128, stride=2)
        self.avgpool = nn.AdaptiveAvgPool3d(1)
        self.fc = nn.Linear(128, num_classes)

    def forward(self, x):
        x = self.maxpool(self.relu(self.bn1(self.conv1(x))))
        x = self.layer4(self.layer3(self.layer2(self.layer1(x))))
        x = self.avgpool(x).flatten(1)
        return self.fc(x)


class ResNeXtBottleneck3d(nn.Module):
    """Grouped bottleneck: 1x1x1 down, 3x3x3 grouped, 1x1x1 up (expansion 2)."""

    def __init__(self, inplanes: int, planes: int, cardinality: int = 32, stride: int = 1):
        super().__init__()
        out_planes = planes * 2
        self.conv1 = nn.Conv3d(inplanes, planes, 1, bias=False)
        self.bn1 = nn.BatchNorm3d(planes)
        self.conv2 = nn.Conv3d(
            planes, planes, 3, stride=stride, padding=1, groups=cardinality, bias=False
        )
        self.bn2 = nn.BatchNorm3d(planes)
        self.conv3 = nn.Conv3d(planes, out_planes, 1, bias=False)
        self.bn3 = nn.BatchNorm3d(out_planes)
        self.relu = nn.ReLU(inplace=True)
        self.downsample = None
        if stride != 1 or inplanes != out_planes:
            self.downsample = nn.Sequential(
                nn.Conv3d(inplanes, out_planes, 1, stride=stride, bias=False),
                nn.BatchNorm3d(out_planes),
            )

    def forward(self, x):
        identity = x if self.downsample is None else self.downsample(x)
        out = self.relu(self.bn1(self.conv1(x)))
        out = self.relu(self.bn2(self.conv2(out)))
        out = self.bn3(self.conv3(out))
        return self.relu(out + identity)


class ResNeXt101(nn.Module):
    """3D ResNeXt-101: cardinality 32, stages of 3/4/23/3 bottlenecks."""

    LAYERS = (3, 4, 23, 3)
    PLANES = (128, 256, 512, 1024)

    def __init__(self, num_classes: int = 27, cardinality: int = 32):
        super().__init__()
        self.conv1 = nn.Conv3d(3, 64, (3, 7, 7), stride=(1, 2, 2), padding=(1, 3, 3), bias=False)
        self.bn1 = nn.BatchNorm3d(64)
        self.relu = nn.ReLU(inplace=True)
        self.maxpool = nn.MaxPool3d(3, stride=2, padding=1)
        stages = []
        inplanes = 64
        for planes, count, stride in zip(self.PLANES, self.LAYERS, (1, 2, 2, 2)):
            for i in range(count):
                stages.append(
                    ResNeXtBottleneck3d(
                        inplanes, planes, cardinality, stride if i == 0 else 1
                    )
                )
                inplanes = planes * 2
        self.stages = nn.Sequential(*stages)
        self.avgpool = nn.AdaptiveAvgPool3d(1)
        self.fc = nn.Linear(2048, num_classes)

    def forward(self, x):
        x = self.maxpool(self.relu(self.bn1(self.conv1(x))))
        x = self.stages(x)
        x = self.avgpool(x).flatten(1)
        return self.fc(x)


class C3D(nn.Module):
    """Plain stacked 3x3x3 convolutions with 4096-d fc6/fc7 head.

    The flattened pool5 output is 512 * (depth/16) * 4 * 4, so the
    16-frame and 32-frame variants differ only in fc6.
    """

    def __init__(self, num_classes: int = 27, clip_depth: int = 16):
        super().__init__()
        if clip_depth % 16 != 0:
            raise ValueError(f"clip depth must be a multiple of 16, got {clip_depth}")
        self.clip_depth = clip_depth
        self.conv1a = nn.Conv3d(3, 64, 3, padding=1)
        self.pool1 = nn.MaxPool3d((1, 2, 2), stride=(1, 2, 2))
        self.conv2a = nn.Conv3d(64, 128, 3, padding=1)
        self.pool2 = nn.MaxPool3d(2, stride=2)
        self.conv3a = nn.Conv3d(128, 256, 3, padding=1)
        self.conv3b = nn.Conv3d(256, 256, 3, padding=1)
        self.pool3 = nn.MaxPool3d(2, stride=2)
        self.conv4a = nn.Conv3d(256, 512, 3, padding=1)
        self.conv4b = nn.Conv3d(512, 512, 3, padding=1)
        self.pool4 = nn.MaxPool3d(2, stride=2)
        self.conv5a = nn.Conv3d(512, 512, 3, padding=1)
        self.conv5b = nn.Conv3d(512, 512, 3, padding=1)
        self.pool5 = nn.MaxPool3d(2, stride=2, padding=(0, 1, 1))
        self.fc6 = nn.Linear(512 * (clip_depth // 16) * 4 * 4, 4096)
        self.fc7 = nn.Linear(4096, 4096)
        self.fc8 = nn.Linear(4096, num_classes)
        self.dropout = nn.Dropout(0.5)
        self.relu = nn.ReLU(inplace=True)

    def forward(self, x):
        x = self.pool1(self.relu(self.conv1a(x)))
        x = self.pool2(self.relu(self.conv2a(x)))
        x = self.pool3(self.relu(self.conv3b(self.relu(self.conv3a(x)))))
        x = self.pool4(self.relu(self.conv4b(self.relu(self.conv4a(x)))))
        x = self.pool5(self.relu(self.conv5b(self.relu(self.conv5a(x)))))
        x = x.flatten(1)
        x = self.dropout(self.relu(self.fc6(x)))
        x = self.dropout(self.relu(self.fc7(x)))
        return self.fc8(x)


def build_model(architecture: str, clip_depth: int, num_classes: int) -> nn.Module:
    """Construct one of the trained variants; rejects other combinations."""
    if architecture not in TRAINED_VARIANTS:
        raise ValueError(f"unknown architecture {architecture!r}; pick one of {ARCHITECTURES}")
    depths, classes = TRAINED_VARIANTS[architecture]
    if clip_depth not in depths:
        raise ValueError(f"{architecture} was trained with clip depth {depths}, got {clip_depth}")
    if num_classes != classes:
        raise ValueError(f"{architecture} was trained with {classes} classes, got {num_classes}")
    if architecture == "resnet10":
        return ResNet10(num_classes)
    if architecture == "resnext101":
        return ResNeXt101(num_classes)
    return C3D(num_classes, clip_depth)


def count_parameters(model: nn.Module) -> int:
    return sum(p.numel() for p in model.parameters())


def parameter_count_matches(architecture: str, clip_depth: int, model: nn.Module,
                            tolerance: float = 0.01) -> tuple[bool, int, float]:
    """Compare the model's parameter count against the published figure.

    Returns (within_tolerance, actual_count, published_count).
    """
    published = PUBLISHED_PARAM_COUNTS[(architecture, clip_depth)]
    actual = count_parameters(model)
    return (math.isclose(actual, published, rel_tol=tolerance), actual, published)


def seeded_checkpoint(architecture: str, clip_depth: int, num_classes: int, seed: int) -> dict:
    """Deterministically initialized weights, for fixtures and testing."""
    torch.manual_seed(seed)
    model = build_model(architecture, clip_depth, num_classes)
    return model.state_dict()
