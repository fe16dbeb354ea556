// three.js adapter: feeds SceneModel typed arrays into a WebGL scene with
// orbit controls. All numeric content arrives prebuilt from scene.ts.

import * as THREE from 'three';
import { OrbitControls } from 'three/examples/jsm/controls/OrbitControls.js';
import type { SceneModel } from './scene';

export class Viewer {
  private readonly renderer: THREE.WebGLRenderer;
  private readonly scene: THREE.Scene;
  private readonly camera: THREE.PerspectiveCamera;
  private readonly controls: OrbitControls;
  private content: THREE.Group | null = null;

  constructor(private readonly container: HTMLElement) {
    this.renderer = new THREE.WebGLRenderer({ antialias: true });
    this.renderer.setPixelRatio(window.devicePixelRatio);
    this.renderer.setClearColor(0x10141c);
    container.appendChild(this.renderer.domElement);

    this.scene = new THREE.Scene();
    this.camera = new THREE.PerspectiveCamera(45, 1, 0.01, 1000);
    this.camera.position.set(14, 10, 14);

    this.scene.add(new THREE.AmbientLight(0xffffff, 0.55));
    const sun = new THREE.DirectionalLight(0xffffff, 1.1);
    sun.position.set(30, 50, 20);
    this.scene.add(sun);

    this.controls = new OrbitControls(this.camera, this.renderer.domElement);
    this.controls.enableDamping = true;

    const animate = () => {
      requestAnimationFrame(animate);
      this.controls.update();
      this.renderer.render(this.scene, this.camera);
    };
    this.resize();
    window.addEventListener('resize', () => this.resize());
    animate();
  }

  private resize(): void {
    const width = this.container.clientWidth || 1;
    const height = this.container.clientHeight || 1;
    this.renderer.setSize(width, height);
    this.camera.aspect = width / height;
    this.camera.updateProjectionMatrix();
  }

  /** Replace the displayed structure; camera state is kept across updates. */
  show(model: SceneModel, fitCamera = false): void {
    if (this.content) {
      this.scene.remove(this.content);
      this.content.traverse((child) => {
        if (child instanceof THREE.Mesh || child instanceof THREE.LineSegments
            || child instanceof THREE.Points) {
          child.geometry.dispose();
          (child.material as THREE.Material).dispose();
        }
      });
    }
    const group = new THREE.Group();

    if (model.segmentPositions.length > 0) {
      const geometry = new THREE.BufferGeometry();
      geometry.setAttribute('position', new THREE.BufferAttribute(model.segmentPositions, 3));
      geometry.setAttribute('color', new THREE.BufferAttribute(model.segmentColors, 3));
      const material = new THREE.LineBasicMaterial({ vertexColors: true, linewidth: 2 });
      group.add(new THREE.LineSegments(geometry, material));
    }

    if (model.trianglePositions.length > 0) {
      const geometry = new THREE.BufferGeometry();
      geometry.setAttribute('position', new THREE.BufferAttribute(model.trianglePositions, 3));
      geometry.computeVertexNormals();
      const material = new THREE.MeshStandardMaterial({
        color: 0x7fb8c4, side: THREE.DoubleSide, flatShading: true,
        transparent: true, opacity: 0.82,
      });
      group.add(new THREE.Mesh(geometry, material));
    }

    if (model.fixedMarkers.length > 0) {
      const geometry = new THREE.BufferGeometry();
      geometry.setAttribute('position', new THREE.BufferAttribute(model.fixedMarkers, 3));
      const material = new THREE.PointsMaterial({ color: 0xffd54a, size: 0.35 });
      group.add(new THREE.Points(geometry, material));
    }

    this.scene.add(group);
    this.content = group;

    if (fitCamera) {
      const radius = model.boundsRadius * 2.2;
      this.camera.position.setLength(Math.max(radius, 2));
      this.controls.target.set(0, 0, 0);
    }
  }
}
