import logging
import os

from PIL import Image

log = logging.getLogger(__name__)

IMAGE_EXTENSIONS = (".jpg", ".jpeg", ".png")


def list_images(root):
    # Walk the tree and keep image files only.
    found = []
    for dirpath, _, filenames in os.walk(root):
        for name in filenames:
            if name.lower().endswith(IMAGE_EXTENSIONS):
                found.append(os.path.join(dirpath, name))
    log.info("Found %d images under %s", len(found), root)
    return found


class ImageFolder:
    def __init__(self, root, transform=None):
        if not os.path.isdir(root):
            log.error("Dataset root %s does not exist", root)
            raise FileNotFoundError(root)
        self.root = root
        self.transform = transform
        self.samples = list_images(root)
        self.classes = sorted({os.path.basename(os.path.dirname(p)) for p in self.samples})

    def __len__(self):
        return len(self.samples)

    def __getitem__(self, index):
        path = self.samples[index]
        try:
            image = Image.open(path).convert("RGB")
        except OSError as exc:
            log.warning("Skipping unreadable image %s: %s", path, exc)
            return None
        label = self.classes.index(os.path.basename(os.path.dirname(path)))
        if self.transform is not None:
            image = self.transform(image)
        return image, label
