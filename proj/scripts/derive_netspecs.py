#!/usr/bin/env python3
"""Derive the bundled network spec files in data/netspecs/.

Layer parameter counts come from the standard CIFAR-10 variants of each
architecture (3x32x32 input, 10 classes, conv weights without bias,
one final linear classifier). Totals line up with the published FP32
model sizes these specs are checked against.

Run from the repository root:  python3 scripts/derive_netspecs.py
"""

import os

OUT_DIR = os.path.join(os.path.dirname(__file__), "..", "data", "netspecs")


def conv(name, cin, cout, k):
    return (name, "CONV", cin * cout * k * k)


def fc(name, cin, cout):
    return (name, "FC", cin * cout + cout)


def vgg(cfg_channels, name):
    layers = []
    cin = 3
    idx = 0
    for cout in cfg_channels:
        idx += 1
        layers.append(conv(f"conv{idx}", cin, cout, 3))
        cin = cout
    layers.append(fc("classifier", cin, 10))
    return name, layers


def vgg11():
    return vgg([64, 128, 256, 256, 512, 512, 512, 512], "vgg11")


def vgg16():
    return vgg([64, 64, 128, 128, 256, 256, 256, 512, 512, 512, 512, 512, 512], "vgg16")


def vgg19():
    return vgg(
        [64, 64, 128, 128, 256, 256, 256, 256, 512, 512, 512, 512, 512, 512, 512, 512],
        "vgg19",
    )


def resnet18():
    # CIFAR ResNet18: stem conv + 4 stages of two basic blocks; the first
    # block of stages 2-4 carries a 1x1 projection shortcut. 20 conv layers.
    layers = [conv("conv1", 3, 64, 3)]
    cin = 64
    for stage, cout in enumerate([64, 128, 256, 512], start=1):
        for block in range(2):
            tag = f"layer{stage}.{block}"
            layers.append(conv(f"{tag}.conv1", cin, cout, 3))
            layers.append(conv(f"{tag}.conv2", cout, cout, 3))
            if block == 0 and cin != cout:
                layers.append(conv(f"{tag}.shortcut", cin, cout, 1))
            cin = cout
    layers.append(fc("linear", 512, 10))
    return "resnet18", layers


def resnet20():
    # CIFAR ResNet20 (identity shortcuts): stem + 3 stages x 3 blocks x 2 convs.
    layers = [conv("conv1", 3, 16, 3)]
    cin = 16
    for stage, cout in enumerate([16, 32, 64], start=1):
        for block in range(3):
            tag = f"layer{stage}.{block}"
            layers.append(conv(f"{tag}.conv1", cin, cout, 3))
            layers.append(conv(f"{tag}.conv2", cout, cout, 3))
            cin = cout
    layers.append(fc("linear", 64, 10))
    return "resnet20", layers


def googlenet():
    # CIFAR GoogLeNet: one stem conv, nine inception modules of seven convs
    # each (the 5x5 branch realised as two stacked 3x3). 64 conv layers.
    incepts = [
        ("a3", 192, (64, 96, 128, 16, 32, 32)),
        ("b3", 256, (128, 128, 192, 32, 96, 64)),
        ("a4", 480, (192, 96, 208, 16, 48, 64)),
        ("b4", 512, (160, 112, 224, 24, 64, 64)),
        ("c4", 512, (128, 128, 256, 24, 64, 64)),
        ("d4", 512, (112, 144, 288, 32, 64, 64)),
        ("e4", 528, (256, 160, 320, 32, 128, 128)),
        ("a5", 832, (256, 160, 320, 32, 128, 128)),
        ("b5", 832, (384, 192, 384, 48, 128, 128)),
    ]
    layers = [conv("pre", 3, 192, 3)]
    for tag, cin, (n1, n3r, n3, n5r, n5, pp) in incepts:
        layers.append(conv(f"{tag}.b1", cin, n1, 1))
        layers.append(conv(f"{tag}.b2.reduce", cin, n3r, 1))
        layers.append(conv(f"{tag}.b2", n3r, n3, 3))
        layers.append(conv(f"{tag}.b3.reduce", cin, n5r, 1))
        layers.append(conv(f"{tag}.b3.a", n5r, n5, 3))
        layers.append(conv(f"{tag}.b3.b", n5, n5, 3))
        layers.append(conv(f"{tag}.b4", cin, pp, 1))
    layers.append(fc("linear", 1024, 10))
    return "googlenet", layers


def write_spec(name, layers):
    path = os.path.join(OUT_DIR, f"{name}_cifar10.netspec")
    conv_total = sum(p for _, kind, p in layers if kind == "CONV")
    conv_count = sum(1 for _, kind, _ in layers if kind == "CONV")
    with open(path, "w") as f:
        f.write("# qnetspec v1\n")
        f.write("dataset cifar10\n")
        for lname, kind, params in layers:
            f.write(f"layer {lname} {kind} {params}\n")
    fp32_mb = sum(p for _, _, p in layers) * 4 / 1e6
    print(
        f"{name:10s}  conv layers {conv_count:3d}  conv params {conv_total:9d}"
        f"  fp32 {fp32_mb:6.2f} MB"
    )
    return conv_total, conv_count


def main():
    os.makedirs(OUT_DIR, exist_ok=True)
    for build in (vgg11, vgg16, vgg19, resnet18, resnet20, googlenet):
        write_spec(*build())


if __name__ == "__main__":
    main()
