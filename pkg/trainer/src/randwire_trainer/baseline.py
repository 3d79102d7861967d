"""Plain sequential CNN of comparable budget, for threshold calibration.

Used once to sanity-check the desk-scale accuracy bound: a randomly wired
net should at least keep up with a boring conv stack of similar parameter
count under the identical training recipe.
"""
from __future__ import annotations

import torch
from torch import nn


class PlainCNN(nn.Module):
    """Conv-BN-ReLU stack mirroring the stage widths of the tiny nets."""

    def __init__(self, channels: int = 32, class_count: int = 10):
        super().__init__()
        c = channels

        def block(cin, cout, stride):
            return nn.Sequential(
                nn.Conv2d(cin, cout, 3, stride=stride, padding=1, bias=False),
                nn.BatchNorm2d(cout),
                nn.ReLU(),
            )

        self.features = nn.Sequential(
            block(3, c // 2, 2),
            block(c // 2, c, 2),
            block(c, c, 2),
            block(c, 2 * c, 1),
            block(2 * c, 2 * c, 2),
            block(2 * c, 4 * c, 1),
            block(4 * c, 4 * c, 2),
        )
        self.head_conv = nn.Conv2d(4 * c, 1280, 1, bias=False)
        self.head_bn = nn.BatchNorm2d(1280)
        self.fc = nn.Linear(1280, class_count)
        for m in self.modules():
            if isinstance(m, nn.Conv2d):
                nn.init.kaiming_normal_(m.weight, mode="fan_out", nonlinearity="relu")

    def forward(self, x, dropped_edges=(), removed_nodes=()):
        x = self.features(x)
        x = self.head_bn(self.head_conv(torch.relu(x)))
        return self.fc(x.mean(dim=(2, 3)))
