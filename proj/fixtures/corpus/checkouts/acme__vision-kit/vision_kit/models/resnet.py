import logging

import torch
from torch import nn

logger = logging.getLogger("vision_kit.models")


class BasicBlock(nn.Module):
    expansion = 1

    def __init__(self, in_planes, planes, stride=1):
        super().__init__()
        self.conv1 = nn.Conv2d(in_planes, planes, 3, stride, 1, bias=False)
        self.bn1 = nn.BatchNorm2d(planes)
        self.conv2 = nn.Conv2d(planes, planes, 3, 1, 1, bias=False)
        self.bn2 = nn.BatchNorm2d(planes)
        self.shortcut = nn.Sequential()
        if stride != 1 or in_planes != planes:
            self.shortcut = nn.Sequential(nn.Conv2d(in_planes, planes, 1, stride, bias=False), nn.BatchNorm2d(planes))

    def forward(self, x):
        out = torch.relu(self.bn1(self.conv1(x)))
        out = self.bn2(self.conv2(out))
        return torch.relu(out + self.shortcut(x))


class ResNet(nn.Module):
    def __init__(self, layers, num_classes=10):
        super().__init__()
        self.in_planes = 64
        logger.debug("Building ResNet with layers=%s classes=%d", layers, num_classes)
        self.stem = nn.Conv2d(3, 64, 3, 1, 1, bias=False)
        self.layers = nn.Sequential(*[self._make_layer(64 * 2 ** i, n, 1 if i == 0 else 2) for i, n in enumerate(layers)])
        self.head = nn.Linear(self.in_planes, num_classes)

    def _make_layer(self, planes, blocks, stride):
        modules = []
        for s in [stride] + [1] * (blocks - 1):
            modules.append(BasicBlock(self.in_planes, planes, s))
            self.in_planes = planes
        return nn.Sequential(*modules)

    def forward(self, x):
        x = self.layers(torch.relu(self.stem(x)))
        return self.head(torch.flatten(nn.functional.adaptive_avg_pool2d(x, 1), 1))


def resnet18(num_classes=10, pretrained=None):
    model = ResNet([2, 2, 2, 2], num_classes)
    if pretrained:
        state = torch.load(pretrained, map_location="cpu")
        missing, unexpected = model.load_state_dict(state, strict=False)
        if missing:
            logger.warning("Missing keys when loading %s: %s", pretrained, missing)
        logger.info(f"Loaded pretrained weights from {pretrained}")
    return model
